#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spectral/dataset.hpp"

namespace spectral {

/// A candidate feature subset: exactly k distinct column indices, ascending.
struct Individual {
  std::vector<int> mask;
};

/// Knobs of the wrapper feature-selection search. The defaults are the
/// published configuration; population and generations are the usual levers
/// when the full-size search is too slow for a given dataset.
struct GaConfig {
  int population = 400;
  double elite_frac = 0.20;  // top fraction kept as parents
  double lucky_frac = 0.05;  // extra parents drawn uniformly from the rest
  int children_per_pair = 8;
  double mutation_frac_mean = 0.10;  // fraction of the population mutated,
  double mutation_frac_std = 0.01;   // drawn per generation from a normal
  int generations = 20;
  int k_select = 100;   // features per individual
  int inner_cv_folds = 10;
  int pls_components = 10;  // fixed depth of the fitness model
  /// Keep the best parent in the next generation (replacing a random child).
  /// Off reproduces the published pure-replacement scheme, whose best-so-far
  /// trace may regress between generations.
  bool elitism = true;
  std::uint64_t seed = 0;

  void validate(int feature_dim) const;
};

/// Per-generation bookkeeping, used by invariant checks and reports.
struct GaGenerationStats {
  int population_size = 0;
  int elite_count = 0;
  int lucky_count = 0;
  bool parents_disjoint = true;  // elite and lucky index sets do not overlap
  int mutated_count = 0;
  /// Offspring whose mask is not exactly k distinct in-range indices. Always
  /// 0 unless crossover or mutation is broken.
  int malformed_offspring = 0;
  double best_rmsecv = 0;  // best fitness in the evaluated generation
};

struct GaResult {
  Individual best;          // best individual ever evaluated
  double best_fitness = 0;  // its RMSECV
  /// Evaluated best of each generation's population. With elitism on this is
  /// monotone non-increasing; the published pure-replacement scheme may
  /// regress between entries. The final brood is evaluated after the last
  /// cycle and counts toward `best` but adds no trace entry.
  std::vector<double> best_rmsecv_per_generation;
  std::vector<Individual> best_per_generation;
  std::vector<GaGenerationStats> stats;
  int fitness_evaluations = 0;  // cache misses, i.e. actual PLS runs
};

/// Fitness of one mask: pooled k-fold RMSECV of a fixed-depth PLS restricted
/// to the mask's columns. Lower is better.
double ga_fitness(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const std::vector<int>& mask, const FoldSplit& folds,
                  int pls_components);

/// Indices of the parent pool: the ceil(elite_frac*P) fittest individuals
/// plus ceil(lucky_frac*P) drawn uniformly without replacement from the
/// remainder. Ordering within the pool is elites (fitness-ascending,
/// index-stable) followed by the lucky draws.
std::vector<int> select_parents(const std::vector<double>& fitness,
                                const GaConfig& config, class Rng& rng,
                                int* elite_count_out = nullptr);

/// Children inherit every index the parents share; the rest of each child is
/// drawn uniformly without replacement from the parents' symmetric
/// difference, topping up from unused columns only if that runs dry.
std::vector<Individual> crossover_pair(const Individual& a, const Individual& b,
                                       int n_children, int k_select,
                                       int feature_dim, class Rng& rng);

/// Mutates round(f*P) distinct individuals in place, f ~ N(mean, std)
/// clamped to [0, 1]. Each mutant swaps one selected index for one
/// unselected index, both uniform. Returns the mutated count.
int mutate_generation(std::vector<Individual>& generation, int feature_dim,
                      const GaConfig& config, class Rng& rng);

/// Full search. Deterministic for a fixed config (including seed).
GaResult ga_run(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                const GaConfig& config);

}  // namespace spectral
