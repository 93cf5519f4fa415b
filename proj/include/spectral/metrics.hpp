#pragma once

#include <Eigen/Dense>

namespace spectral {

/// How a sum of squares is reduced before the square root.
/// `mean` divides by the number of samples (the conventional RMSE);
/// `total` keeps the bare sum under the root.
enum class SumForm { mean, total };

/// Root-mean-square error between predictions and reference values.
/// Both vectors must be non-empty and the same length.
double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual,
            SumForm form = SumForm::mean);

/// Coefficient of determination, 1 - SSE/SST. The reference values must not
/// all be equal (SST > 0), otherwise the ratio is undefined and this throws.
double r_squared(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

/// Cross-validation error as a percentage of the reference spread:
/// 100 * rmsecv / std_dev. Throws unless std_dev > 0.
double closeness_pct(double rmsecv, double std_dev);

}  // namespace spectral
