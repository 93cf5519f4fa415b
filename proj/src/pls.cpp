#include "spectral/pls.hpp"

#include <algorithm>
#include <cmath>

#include "spectral/error.hpp"

namespace spectral {

namespace {
constexpr double kCovarianceFloor = 1e-12;

void check_xy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  require(X.rows() == y.size(), ErrorCode::invalid_argument,
          "pls: X row count does not match y length");
  require(X.rows() >= 2, ErrorCode::invalid_argument,
          "pls: need at least 2 samples");
  require(X.cols() >= 1, ErrorCode::invalid_argument,
          "pls: need at least 1 feature");
}
}  // namespace

PlsModel pls_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int n_components) {
  check_xy(X, y);
  require(n_components >= 1, ErrorCode::invalid_argument,
          "pls: need at least 1 component");

  const int n = static_cast<int>(X.rows());
  const int dim = static_cast<int>(X.cols());
  // Centered X has rank at most min(n - 1, dim); more components cannot exist.
  const int max_a = std::min(n_components, std::min(dim, n - 1));

  PlsModel model;
  model.x_mean = X.colwise().mean();
  model.y_mean = y.mean();

  Eigen::MatrixXd Xc = X.rowwise() - model.x_mean.transpose();
  Eigen::VectorXd yc = y.array() - model.y_mean;

  Eigen::MatrixXd W(dim, max_a), P(dim, max_a);
  Eigen::VectorXd q(max_a);

  int a = 0;
  for (; a < max_a; ++a) {
    // Weight: direction of remaining covariance between X and y.
    Eigen::VectorXd cov = Xc.transpose() * yc;
    const double cov_norm = cov.norm();
    if (cov_norm < kCovarianceFloor) break;
    const Eigen::VectorXd w = cov / cov_norm;

    const Eigen::VectorXd t = Xc * w;
    const double tt = t.squaredNorm();
    if (tt < kCovarianceFloor) break;

    const Eigen::VectorXd p = (Xc.transpose() * t) / tt;
    const double qa = yc.dot(t) / tt;

    // Deflate both blocks so the next component works on the residual.
    Xc.noalias() -= t * p.transpose();
    yc.noalias() -= qa * t;

    W.col(a) = w;
    P.col(a) = p;
    q[a] = qa;
  }

  model.n_components = a;
  if (a == 0) {
    // Constant predictor: X carries no covariance with y.
    model.weights.resize(dim, 0);
    model.loadings.resize(dim, 0);
    model.y_loadings.resize(0);
    model.coefficients = Eigen::VectorXd::Zero(dim);
    model.intercept = model.y_mean;
    return model;
  }

  model.weights = W.leftCols(a);
  model.loadings = P.leftCols(a);
  model.y_loadings = q.head(a);

  // Collapse the recursion: B = W (P^T W)^{-1} q. P^T W is upper triangular
  // with unit-like diagonal in exact arithmetic; a generic solve is robust.
  const Eigen::MatrixXd PtW = model.loadings.transpose() * model.weights;
  const Eigen::VectorXd r = PtW.colPivHouseholderQr().solve(model.y_loadings);
  model.coefficients = model.weights * r;
  model.intercept = model.y_mean - model.x_mean.dot(model.coefficients);
  return model;
}

Eigen::VectorXd pls_predict(const PlsModel& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.x_mean.size(), ErrorCode::invalid_argument,
          "pls_predict: feature count does not match the model");
  return (X * model.coefficients).array() + model.intercept;
}

Eigen::VectorXd pls_predict_latent(const PlsModel& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.x_mean.size(), ErrorCode::invalid_argument,
          "pls_predict_latent: feature count does not match the model");
  Eigen::MatrixXd E = X.rowwise() - model.x_mean.transpose();
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(X.rows(), model.y_mean);
  for (int a = 0; a < model.n_components; ++a) {
    const Eigen::VectorXd t = E * model.weights.col(a);
    yhat.noalias() += model.y_loadings[a] * t;
    E.noalias() -= t * model.loadings.col(a).transpose();
  }
  return yhat;
}

Eigen::MatrixXd pls_predict_per_component(const PlsModel& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.x_mean.size(), ErrorCode::invalid_argument,
          "pls_predict_per_component: feature count does not match the model");
  Eigen::MatrixXd E = X.rowwise() - model.x_mean.transpose();
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(X.rows(), model.y_mean);
  Eigen::MatrixXd out(X.rows(), model.n_components);
  for (int a = 0; a < model.n_components; ++a) {
    const Eigen::VectorXd t = E * model.weights.col(a);
    yhat.noalias() += model.y_loadings[a] * t;
    E.noalias() -= t * model.loadings.col(a).transpose();
    out.col(a) = yhat;
  }
  return out;
}

int select_components(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      int inner_folds, int max_components, std::uint64_t seed) {
  check_xy(X, y);
  require(max_components >= 1, ErrorCode::invalid_argument,
          "select_components: need at least 1 component");
  const int n = static_cast<int>(X.rows());
  const int cap = std::min(max_components, std::min(static_cast<int>(X.cols()), n - 1));

  const FoldSplit folds = kfold_split(n, inner_folds, seed);
  Eigen::VectorXd sse = Eigen::VectorXd::Zero(cap);

  for (int f = 0; f < folds.k; ++f) {
    const auto& tr = folds.train[static_cast<std::size_t>(f)];
    const auto& va = folds.validation[static_cast<std::size_t>(f)];
    Eigen::MatrixXd Xtr(tr.size(), X.cols());
    Eigen::VectorXd ytr(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
      ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
    }
    Eigen::MatrixXd Xva(va.size(), X.cols());
    Eigen::VectorXd yva(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      Xva.row(static_cast<Eigen::Index>(i)) = X.row(va[i]);
      yva[static_cast<Eigen::Index>(i)] = y[va[i]];
    }

    const PlsModel model = pls_fit(Xtr, ytr, cap);
    const Eigen::MatrixXd preds = pls_predict_per_component(model, Xva);
    for (int a = 0; a < cap; ++a) {
      // Depths past the achieved count behave like the deepest available one.
      const int col = std::min(a, model.n_components - 1);
      const Eigen::VectorXd p =
          (model.n_components == 0)
              ? Eigen::VectorXd::Constant(yva.size(), model.y_mean)
              : Eigen::VectorXd(preds.col(col));
      sse[a] += (p - yva).squaredNorm();
    }
  }

  int best = 0;
  for (int a = 1; a < cap; ++a) {
    if (sse[a] < sse[best]) best = a;
  }
  return best + 1;
}

double pls_rmsecv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const FoldSplit& folds, int n_components) {
  check_xy(X, y);
  const int n = static_cast<int>(X.rows());
  double sse = 0;
  for (int f = 0; f < folds.k; ++f) {
    const auto& tr = folds.train[static_cast<std::size_t>(f)];
    const auto& va = folds.validation[static_cast<std::size_t>(f)];
    Eigen::MatrixXd Xtr(tr.size(), X.cols());
    Eigen::VectorXd ytr(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(tr[i]);
      ytr[static_cast<Eigen::Index>(i)] = y[tr[i]];
    }
    const PlsModel model = pls_fit(Xtr, ytr, n_components);
    for (const int idx : va) {
      const double pred = model.coefficients.dot(X.row(idx)) + model.intercept;
      const double err = pred - y[idx];
      sse += err * err;
    }
  }
  return std::sqrt(sse / n);
}

SegmentChoice segmented_pls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            int segment_len, int folds, std::uint64_t seed,
                            int n_components) {
  check_xy(X, y);
  require(segment_len >= 1, ErrorCode::invalid_argument,
          "segmented_pls: segment length must be positive");
  const int dim = static_cast<int>(X.cols());
  const int n_segments = (dim + segment_len - 1) / segment_len;

  const FoldSplit split = kfold_split(static_cast<int>(X.rows()), folds, seed);

  SegmentChoice choice;
  choice.per_segment_rmsecv.resize(static_cast<std::size_t>(n_segments));
  for (int s = 0; s < n_segments; ++s) {
    const int begin = s * segment_len;
    const int len = std::min(segment_len, dim - begin);
    const Eigen::MatrixXd block = X.middleCols(begin, len);
    choice.per_segment_rmsecv[static_cast<std::size_t>(s)] =
        pls_rmsecv(block, y, split, n_components);
  }

  choice.best_segment = 0;
  for (int s = 1; s < n_segments; ++s) {
    if (choice.per_segment_rmsecv[static_cast<std::size_t>(s)] <
        choice.per_segment_rmsecv[static_cast<std::size_t>(choice.best_segment)]) {
      choice.best_segment = s;
    }
  }
  return choice;
}

}  // namespace spectral
