#include "spectral/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "spectral/error.hpp"
#include "spectral/parallel.hpp"
#include "spectral/pls.hpp"
#include "spectral/rng.hpp"

namespace spectral {

void GaConfig::validate(int feature_dim) const {
  require(population >= 2, ErrorCode::invalid_argument, "ga: population must be >= 2");
  require(k_select >= 1 && k_select <= feature_dim, ErrorCode::invalid_argument,
          "ga: k_select must be in [1, feature_dim]");
  require(elite_frac > 0 && elite_frac <= 1, ErrorCode::invalid_argument,
          "ga: elite_frac must be in (0, 1]");
  require(lucky_frac >= 0 && lucky_frac <= 1, ErrorCode::invalid_argument,
          "ga: lucky_frac must be in [0, 1]");
  require(children_per_pair >= 1, ErrorCode::invalid_argument,
          "ga: children_per_pair must be positive");
  require(mutation_frac_std >= 0, ErrorCode::invalid_argument,
          "ga: mutation_frac_std must be non-negative");
  require(generations >= 1, ErrorCode::invalid_argument, "ga: generations must be positive");
  require(inner_cv_folds >= 2, ErrorCode::invalid_argument,
          "ga: inner_cv_folds must be >= 2");
  require(pls_components >= 1, ErrorCode::invalid_argument,
          "ga: pls_components must be positive");

  const int elites = static_cast<int>(std::ceil(elite_frac * population));
  const int lucky = static_cast<int>(std::ceil(lucky_frac * population));
  const int pool = elites + lucky;
  require(pool >= 2 && pool <= population, ErrorCode::invalid_argument,
          "ga: parent pool must have between 2 and population members");
  // The breeding scheme replaces the population exactly: disjoint pairs,
  // a fixed brood per pair.
  require(pool % 2 == 0, ErrorCode::invalid_argument,
          "ga: parent pool size must be even");
  require((pool / 2) * children_per_pair == population, ErrorCode::invalid_argument,
          "ga: (parent pool / 2) * children_per_pair must equal population");
}

double ga_fitness(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<int>& mask, const FoldSplit& folds,
                  int pls_components) {
  require(!mask.empty(), ErrorCode::invalid_argument, "ga_fitness: empty mask");
  Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(mask.size()));
  for (std::size_t j = 0; j < mask.size(); ++j) {
    require(mask[j] >= 0 && mask[j] < X.cols(), ErrorCode::invalid_argument,
            "ga_fitness: mask index out of range");
    sub.col(static_cast<Eigen::Index>(j)) = X.col(mask[j]);
  }
  return pls_rmsecv(sub, y, folds, pls_components);
}

std::vector<int> select_parents(const std::vector<double>& fitness,
                                const GaConfig& config, Rng& rng,
                                int* elite_count_out) {
  const int pop = static_cast<int>(fitness.size());
  const int elites = static_cast<int>(std::ceil(config.elite_frac * pop));
  const int lucky = static_cast<int>(std::ceil(config.lucky_frac * pop));

  std::vector<int> order(fitness.size());
  std::iota(order.begin(), order.end(), 0);
  // Ties broken by index so selection is deterministic.
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (fitness[static_cast<std::size_t>(a)] != fitness[static_cast<std::size_t>(b)])
      return fitness[static_cast<std::size_t>(a)] < fitness[static_cast<std::size_t>(b)];
    return a < b;
  });

  std::vector<int> pool(order.begin(), order.begin() + elites);
  const int remainder = pop - elites;
  const std::vector<int> draws = rng.sample_indices(remainder, std::min(lucky, remainder));
  for (const int d : draws) pool.push_back(order[static_cast<std::size_t>(elites + d)]);

  if (elite_count_out) *elite_count_out = elites;
  return pool;
}

std::vector<Individual> crossover_pair(const Individual& a, const Individual& b,
                                       int n_children, int k_select,
                                       int feature_dim, Rng& rng) {
  std::vector<int> shared;
  std::set_intersection(a.mask.begin(), a.mask.end(), b.mask.begin(), b.mask.end(),
                        std::back_inserter(shared));
  std::vector<int> sym_diff;
  std::set_symmetric_difference(a.mask.begin(), a.mask.end(), b.mask.begin(),
                                b.mask.end(), std::back_inserter(sym_diff));

  std::vector<Individual> children;
  children.reserve(static_cast<std::size_t>(n_children));
  for (int c = 0; c < n_children; ++c) {
    Individual child;
    child.mask = shared;
    int missing = k_select - static_cast<int>(child.mask.size());
    if (missing > 0) {
      const int take = std::min(missing, static_cast<int>(sym_diff.size()));
      for (const int idx : rng.sample_indices(static_cast<int>(sym_diff.size()), take)) {
        child.mask.push_back(sym_diff[static_cast<std::size_t>(idx)]);
      }
      missing -= take;
    }
    if (missing > 0) {
      // Parents of equal size always cover k; this only fires for odd inputs.
      std::vector<char> used(static_cast<std::size_t>(feature_dim), 0);
      for (const int idx : child.mask) used[static_cast<std::size_t>(idx)] = 1;
      while (missing > 0) {
        const int idx = static_cast<int>(rng.below(static_cast<std::uint64_t>(feature_dim)));
        if (!used[static_cast<std::size_t>(idx)]) {
          used[static_cast<std::size_t>(idx)] = 1;
          child.mask.push_back(idx);
          --missing;
        }
      }
    }
    std::sort(child.mask.begin(), child.mask.end());
    children.push_back(std::move(child));
  }
  return children;
}

int mutate_generation(std::vector<Individual>& generation, int feature_dim,
                      const GaConfig& config, Rng& rng) {
  const int pop = static_cast<int>(generation.size());
  double frac = rng.normal(config.mutation_frac_mean, config.mutation_frac_std);
  frac = std::clamp(frac, 0.0, 1.0);
  const int count = static_cast<int>(std::lround(frac * pop));

  const std::vector<int> victims = rng.sample_indices(pop, count);
  for (const int v : victims) {
    auto& mask = generation[static_cast<std::size_t>(v)].mask;
    if (static_cast<int>(mask.size()) >= feature_dim) continue;  // nothing to swap in
    const std::size_t drop = static_cast<std::size_t>(rng.below(mask.size()));
    int swap_in;
    do {
      swap_in = static_cast<int>(rng.below(static_cast<std::uint64_t>(feature_dim)));
    } while (std::binary_search(mask.begin(), mask.end(), swap_in));
    mask[drop] = swap_in;
    std::sort(mask.begin(), mask.end());
  }
  return count;
}

namespace {

bool well_formed(const std::vector<int>& mask, int k_select, int feature_dim) {
  if (static_cast<int>(mask.size()) != k_select) return false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] < 0 || mask[i] >= feature_dim) return false;
    if (i > 0 && mask[i] <= mask[i - 1]) return false;  // sorted and distinct
  }
  return true;
}

struct MaskHash {
  std::size_t operator()(const std::vector<int>& mask) const noexcept {
    std::size_t h = 1469598103934665603ull;  // FNV-1a
    for (const int v : mask) {
      h ^= static_cast<std::size_t>(v);
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

GaResult ga_run(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const GaConfig& config) {
  const int dim = static_cast<int>(X.cols());
  config.validate(dim);

  const FoldSplit folds = kfold_split(static_cast<int>(X.rows()),
                                      config.inner_cv_folds,
                                      derive_seed(config.seed, 0x666f6c64 /* "fold" */));
  Rng rng(config.seed);

  std::vector<Individual> population(static_cast<std::size_t>(config.population));
  for (auto& ind : population) {
    ind.mask = rng.sample_indices(dim, config.k_select);
    std::sort(ind.mask.begin(), ind.mask.end());
  }

  std::unordered_map<std::vector<int>, double, MaskHash> cache;
  GaResult result;
  result.best_fitness = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const std::vector<Individual>& pop) {
    // Evaluate distinct uncached masks, possibly in parallel; the cache is
    // only touched from this thread.
    std::vector<const std::vector<int>*> misses;
    for (const auto& ind : pop) {
      if (!cache.count(ind.mask)) {
        cache.emplace(ind.mask, -1.0);  // placeholder marks it as scheduled
        misses.push_back(&ind.mask);
      }
    }
    std::vector<double> values(misses.size());
    parallel_for(0, static_cast<int>(misses.size()), [&](int i) {
      values[static_cast<std::size_t>(i)] =
          ga_fitness(X, y, *misses[static_cast<std::size_t>(i)], folds,
                     config.pls_components);
    });
    for (std::size_t i = 0; i < misses.size(); ++i) {
      cache[*misses[i]] = values[i];
    }
    result.fitness_evaluations += static_cast<int>(misses.size());

    std::vector<double> fitness(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = cache.at(pop[i].mask);
    return fitness;
  };

  auto track_best = [&](const std::vector<Individual>& pop,
                        const std::vector<double>& fitness) {
    int arg = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (fitness[i] < fitness[static_cast<std::size_t>(arg)]) arg = static_cast<int>(i);
    }
    if (fitness[static_cast<std::size_t>(arg)] < result.best_fitness) {
      result.best_fitness = fitness[static_cast<std::size_t>(arg)];
      result.best = pop[static_cast<std::size_t>(arg)];
    }
    return arg;
  };

  for (int g = 0; g < config.generations; ++g) {
    const std::vector<double> fitness = evaluate(population);
    const int gen_best = track_best(population, fitness);

    GaGenerationStats stats;
    stats.population_size = static_cast<int>(population.size());
    stats.best_rmsecv = fitness[static_cast<std::size_t>(gen_best)];

    int elite_count = 0;
    std::vector<int> pool = select_parents(fitness, config, rng, &elite_count);
    stats.elite_count = elite_count;
    stats.lucky_count = static_cast<int>(pool.size()) - elite_count;
    {
      std::vector<int> sorted_pool = pool;
      std::sort(sorted_pool.begin(), sorted_pool.end());
      stats.parents_disjoint =
          std::adjacent_find(sorted_pool.begin(), sorted_pool.end()) == sorted_pool.end();
    }

    // Random disjoint couples: shuffle the pool, pair neighbours.
    rng.shuffle(pool);
    std::vector<Individual> children;
    children.reserve(static_cast<std::size_t>(config.population));
    for (std::size_t p = 0; p + 1 < pool.size(); p += 2) {
      auto brood = crossover_pair(population[static_cast<std::size_t>(pool[p])],
                                  population[static_cast<std::size_t>(pool[p + 1])],
                                  config.children_per_pair, config.k_select, dim, rng);
      for (auto& child : brood) children.push_back(std::move(child));
    }

    stats.mutated_count = mutate_generation(children, dim, config, rng);

    if (config.elitism) {
      const std::size_t slot =
          static_cast<std::size_t>(rng.below(children.size()));
      children[slot] = result.best;
    }

    for (const auto& child : children) {
      if (!well_formed(child.mask, config.k_select, dim)) ++stats.malformed_offspring;
    }

    result.best_rmsecv_per_generation.push_back(fitness[static_cast<std::size_t>(gen_best)]);
    result.best_per_generation.push_back(population[static_cast<std::size_t>(gen_best)]);
    result.stats.push_back(stats);

    population = std::move(children);
  }

  // The final brood never starts another cycle but is still evaluated, so
  // `best` reflects all bred individuals.
  const std::vector<double> fitness = evaluate(population);
  track_best(population, fitness);

  return result;
}

}  // namespace spectral
