#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectral/dataset.hpp"
#include "spectral/ga.hpp"
#include "spectral/nn.hpp"
#include "spectral/preprocess.hpp"

namespace spectral {

/// GA search trace of one outer fold (the GA runs inside each fold's chain
/// fit, on training data only).
struct GaFoldTrace {
  int fold = 0;
  std::vector<double> best_rmsecv;  // per generation
  std::vector<int> best_mask;
};

/// Everything one cross-validated strategy evaluation produces.
struct EvalReport {
  std::string strategy;
  int folds = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_fold_rmse;
  double rmsecv = 0;   // pooled: sqrt(sum of squared validation residuals / n)
  double r2_mean = 0;  // mean per-fold validation R^2
  double std_dev = 0;  // population std of the full dataset's sugar
  double closeness_pct = 0;
  double wall_time_s = 0;  // informational; never serialized
  std::vector<GaFoldTrace> ga_trace;              // GA strategies only
  std::vector<std::vector<double>> nn_loss_trace;  // NN strategies: per fold
};

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;

  // PLS model: component count chosen per fold by inner cross-validation.
  int pls_max_components = 15;
  int pls_inner_folds = 5;

  // SEGPLS: fixed depth; the segment is chosen per fold by inner CV.
  int segpls_components = 10;

  // GA preprocessing step (k_select comes from the strategy text).
  GaConfig ga;

  // Neural models.
  TrainConfig nn;
  bool nn_reduced = false;           // reduced layer sizes for fast runs
  std::vector<int> nn_mlp_widths;    // override when non-empty
  std::vector<int> nn_conv_channels; // override when non-empty
  int nn_head_width = 0;             // override when > 0
};

/// Cross-validates one strategy: per fold, fit the preprocessing chain and
/// model on the training split, predict the validation split. Fold seeds for
/// the GA and network initialization derive from (seed, fold).
EvalReport cross_validate(const SpectraDataset& ds, const Strategy& strategy,
                          const CvOptions& options);
EvalReport cross_validate(const SpectraDataset& ds, const std::string& strategy_text,
                          const CvOptions& options);

/// Evaluates several strategies on the same fold split. A failing strategy
/// does not abort the rest: its report slot is empty and the error lands in
/// row_errors (parallel to the input list, empty string on success).
std::vector<EvalReport> compare_strategies(const SpectraDataset& ds,
                                           const std::vector<std::string>& strategies,
                                           const CvOptions& options,
                                           std::vector<std::string>* row_errors = nullptr);

/// Trains the strategy's model on the full dataset (chain fitted on all
/// samples) and saves the network to path. PLS strategies are rejected; only
/// neural models serialize.
void train_and_save_model(const SpectraDataset& ds, const Strategy& strategy,
                          const CvOptions& options, const std::string& path);

}  // namespace spectral
