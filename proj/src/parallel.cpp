#include "spectral/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spectral {

namespace {
thread_local bool inside_parallel_region = false;
}

int thread_budget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SPECTRAL_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0') {
      return std::max(1, static_cast<int>(std::min<long>(parsed, hw)));
    }
  }
  return hw;
}

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  const int count = end - begin;
  if (count <= 0) return;

  const int workers = inside_parallel_region ? 1 : std::min(thread_budget(), count);
  if (workers == 1) {
    const bool was_inside = inside_parallel_region;
    inside_parallel_region = true;
    try {
      for (int i = begin; i < end; ++i) fn(i);
    } catch (...) {
      inside_parallel_region = was_inside;
      throw;
    }
    inside_parallel_region = was_inside;
    return;
  }

  std::atomic<int> next{begin};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto body = [&] {
    const bool was_inside = inside_parallel_region;
    inside_parallel_region = true;
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= end) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        break;
      }
    }
    inside_parallel_region = was_inside;
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers - 1));
  for (int t = 1; t < workers; ++t) threads.emplace_back(body);
  body();
  for (auto& th : threads) th.join();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spectral
