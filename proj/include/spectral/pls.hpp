#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spectral/dataset.hpp"

namespace spectral {

/// PLS1 regression model produced by NIPALS.
///
/// `weights`/`loadings`/`y_loadings` hold the per-component quantities in
/// extraction order; `coefficients`/`intercept` are the collapsed linear form
///   prediction = x . coefficients + intercept,
/// algebraically identical to running the component recursion.
struct PlsModel {
  int n_components = 0;  // achieved; may be below the request when X deflates to zero
  Eigen::VectorXd x_mean;
  double y_mean = 0;
  Eigen::MatrixXd weights;     // dim x A, unit-norm columns
  Eigen::MatrixXd loadings;    // dim x A
  Eigen::VectorXd y_loadings;  // A
  Eigen::VectorXd coefficients;  // dim
  double intercept = 0;
};

/// Fits PLS1 with up to n_components latent variables.
/// Stops early when the remaining covariance ||X^T y|| drops below 1e-12.
PlsModel pls_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_components);

/// Prediction through the collapsed coefficient vector.
Eigen::VectorXd pls_predict(const PlsModel& model, const Eigen::MatrixXd& X);

/// Prediction through the component recursion (score-by-score deflation).
/// Agrees with pls_predict to rounding error; kept as a consistency oracle.
Eigen::VectorXd pls_predict_latent(const PlsModel& model, const Eigen::MatrixXd& X);

/// Column a (0-based) holds predictions using the first a+1 components.
/// One fit at full depth serves every truncation, which is what makes
/// component selection by inner cross-validation cheap.
Eigen::MatrixXd pls_predict_per_component(const PlsModel& model, const Eigen::MatrixXd& X);

/// Chooses the component count in [1, max_components] minimizing inner
/// k-fold RMSECV; ties go to the smaller count.
int select_components(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      int inner_folds, int max_components, std::uint64_t seed);

/// Pooled RMSECV of a fixed-depth PLS over the given folds:
/// sqrt(sum of squared validation residuals / n).
double pls_rmsecv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const FoldSplit& folds, int n_components);

struct SegmentChoice {
  int best_segment = 0;                   // 0-based, smallest index on ties
  std::vector<double> per_segment_rmsecv;
};

/// Scores PLS restricted to each contiguous segment of segment_len columns
/// (the tail segment may be shorter) by k-fold RMSECV.
SegmentChoice segmented_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            int segment_len, int folds, std::uint64_t seed,
                            int n_components);

}  // namespace spectral
