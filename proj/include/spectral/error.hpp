#pragma once

#include <stdexcept>
#include <string>

namespace spectral {

enum class ErrorCode {
  invalid_argument,
  parse,
  io,
  numeric,
};

/// Exception carrying a coarse error category. The shared-library boundary
/// maps the category to a C status code; the message survives verbatim.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace spectral
