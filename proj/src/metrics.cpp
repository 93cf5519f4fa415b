#include "spectral/metrics.hpp"

#include <cmath>

#include "spectral/error.hpp"

namespace spectral {

double rmse(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual,
            SumForm form) {
  require(predicted.size() == actual.size(), ErrorCode::invalid_argument,
          "rmse: prediction and reference lengths differ");
  require(predicted.size() > 0, ErrorCode::invalid_argument,
          "rmse: empty input");
  const double sse = (predicted - actual).squaredNorm();
  if (form == SumForm::total) return std::sqrt(sse);
  return std::sqrt(sse / static_cast<double>(predicted.size()));
}

double r_squared(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
  require(predicted.size() == actual.size(), ErrorCode::invalid_argument,
          "r_squared: prediction and reference lengths differ");
  require(predicted.size() > 0, ErrorCode::invalid_argument,
          "r_squared: empty input");
  const double mean = actual.mean();
  const double sst = (actual.array() - mean).matrix().squaredNorm();
  require(sst > 0.0, ErrorCode::invalid_argument,
          "r_squared: reference values are constant, SST is zero");
  const double sse = (predicted - actual).squaredNorm();
  return 1.0 - sse / sst;
}

double closeness_pct(double rmsecv, double std_dev) {
  require(std_dev > 0.0, ErrorCode::invalid_argument,
          "closeness_pct: standard deviation must be positive");
  return 100.0 * rmsecv / std_dev;
}

}  // namespace spectral
