#include <cmath>
#include <vector>

#include <doctest.h>

#include "spectral/error.hpp"
#include "spectral/pls.hpp"
#include "spectral/rng.hpp"

using namespace spectral;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.normal(0.0, 1.0);
  return X;
}

// Independent least-squares oracle: solve the centered normal equations by
// Gauss-Jordan elimination with partial pivoting, no Eigen solvers involved.
Eigen::VectorXd least_squares_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::RowVectorXd x_mean = X.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const int d = static_cast<int>(X.cols());

  std::vector<std::vector<double>> a(d, std::vector<double>(d + 1, 0.0));
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) a[r][c] = Xc.col(r).dot(Xc.col(c));
    a[r][d] = Xc.col(r).dot(yc);
  }
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    REQUIRE(std::abs(a[col][col]) > 1e-12);
    const double inv = 1.0 / a[col][col];
    for (int c = col; c <= d; ++c) a[col][c] *= inv;
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
    }
  }
  Eigen::VectorXd beta(d);
  for (int r = 0; r < d; ++r) beta[r] = a[r][d];
  return beta;
}

}  // namespace

TEST_SUITE("pls") {

TEST_CASE("full-depth PLS equals ordinary least squares on full-rank data") {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    const auto X = random_matrix(rng, 20, 5);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) y[i] = rng.normal(0.0, 1.0);

    const auto model = pls_fit(X, y, 5);
    REQUIRE(model.n_components == 5);
    const auto beta = least_squares_oracle(X, y);
    CHECK((model.coefficients - beta).cwiseAbs().maxCoeff() < 1e-8);

    const double intercept_oracle = y.mean() - X.colwise().mean().dot(beta);
    CHECK(model.intercept == doctest::Approx(intercept_oracle).epsilon(1e-8));
  }
}

TEST_CASE("collapsed coefficients agree with the component recursion") {
  Rng rng(7);
  const auto X = random_matrix(rng, 30, 12);
  Eigen::VectorXd y = X.col(0) - 0.5 * X.col(4) + X.col(9);
  for (int i = 0; i < 30; ++i) y[i] += rng.normal(0.0, 0.05);

  for (int a : {1, 2, 4, 8}) {
    const auto model = pls_fit(X, y, a);
    const auto direct = pls_predict(model, X);
    const auto latent = pls_predict_latent(model, X);
    CHECK((direct - latent).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("weights are unit norm and scores are orthogonal") {
  Rng rng(11);
  const auto X = random_matrix(rng, 25, 8);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) y[i] = rng.normal(0.0, 1.0);
  const auto model = pls_fit(X, y, 4);
  REQUIRE(model.n_components == 4);

  for (int a = 0; a < 4; ++a)
    CHECK(model.weights.col(a).norm() == doctest::Approx(1.0).epsilon(1e-12));

  // recompute scores by walking the deflation like the fit does
  Eigen::MatrixXd Xc = X.rowwise() - model.x_mean.transpose();
  Eigen::MatrixXd scores(25, 4);
  for (int a = 0; a < 4; ++a) {
    scores.col(a) = Xc * model.weights.col(a);
    Xc -= scores.col(a) * model.loadings.col(a).transpose();
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      CHECK(std::abs(scores.col(a).dot(scores.col(b))) < 1e-8);
}

TEST_CASE("mean input predicts mean output") {
  Rng rng(3);
  const auto X = random_matrix(rng, 15, 6);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) y[i] = rng.normal(5.0, 2.0);
  const auto model = pls_fit(X, y, 3);
  Eigen::MatrixXd mean_row = X.colwise().mean();
  CHECK(pls_predict(model, mean_row)[0] == doctest::Approx(y.mean()).epsilon(1e-12));
}

TEST_CASE("component count is capped by rank and sample count") {
  Rng rng(5);
  // rank 2: two independent columns plus copies
  Eigen::MatrixXd X(12, 4);
  X.col(0) = random_matrix(rng, 12, 1);
  X.col(1) = random_matrix(rng, 12, 1);
  X.col(2) = 2.0 * X.col(0);
  X.col(3) = X.col(0) + X.col(1);
  Eigen::VectorXd y = X.col(0) + X.col(1);
  const auto model = pls_fit(X, y, 10);
  CHECK(model.n_components <= 2);
  // still predicts the planted relation
  CHECK((pls_predict(model, X) - y).cwiseAbs().maxCoeff() < 1e-8);

  // n-1 bound: 3 samples allow at most 2 components
  const auto few = pls_fit(random_matrix(rng, 3, 6), Eigen::VectorXd::Ones(3), 6);
  CHECK(few.n_components <= 2);
}

TEST_CASE("constant target collapses to the intercept") {
  Rng rng(9);
  const auto X = random_matrix(rng, 10, 4);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 3.5);
  const auto model = pls_fit(X, y, 3);
  CHECK(model.n_components == 0);
  const auto pred = pls_predict(model, X);
  CHECK((pred.array() - 3.5).abs().maxCoeff() < 1e-12);
}

TEST_CASE("per-component predictions truncate the recursion") {
  Rng rng(13);
  const auto X = random_matrix(rng, 20, 7);
  Eigen::VectorXd y = X.col(1) - X.col(3);
  for (int i = 0; i < 20; ++i) y[i] += rng.normal(0.0, 0.1);

  const auto full = pls_fit(X, y, 5);
  REQUIRE(full.n_components == 5);
  const auto per = pls_predict_per_component(full, X);
  REQUIRE(per.cols() == 5);
  for (int a = 1; a <= 5; ++a) {
    const auto truncated = pls_fit(X, y, a);
    CHECK((per.col(a - 1) - pls_predict(truncated, X)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("select_components finds a planted two-component structure") {
  Rng rng(21);
  // y depends on two orthogonal latent directions buried in 10 columns
  const auto T = random_matrix(rng, 60, 2);
  const auto P = random_matrix(rng, 10, 2);
  Eigen::MatrixXd X = T * P.transpose();
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j) X(i, j) += rng.normal(0.0, 0.01);
  const Eigen::VectorXd y = T.col(0) + 2.0 * T.col(1);

  const int chosen = select_components(X, y, 5, 8, 42);
  CHECK(chosen >= 2);
  CHECK(chosen <= 4);
  CHECK(select_components(X, y, 5, 8, 42) == chosen);  // deterministic
}

TEST_CASE("pls_rmsecv matches a hand-rolled fold loop") {
  Rng rng(31);
  const auto X = random_matrix(rng, 24, 5);
  Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(5, 1.0, 2.0);
  for (int i = 0; i < 24; ++i) y[i] += rng.normal(0.0, 0.2);

  const auto folds = kfold_split(24, 4, 99);
  const double reported = pls_rmsecv(X, y, folds, 3);

  double sse = 0;
  for (int f = 0; f < 4; ++f) {
    const auto& tr = folds.train[f];
    const auto& va = folds.validation[f];
    Eigen::MatrixXd Xtr(tr.size(), 5), Xva(va.size(), 5);
    Eigen::VectorXd ytr(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<int>(i)) = X.row(tr[i]);
      ytr[static_cast<int>(i)] = y[tr[i]];
    }
    for (std::size_t i = 0; i < va.size(); ++i) Xva.row(static_cast<int>(i)) = X.row(va[i]);
    const auto pred = pls_predict(pls_fit(Xtr, ytr, 3), Xva);
    for (std::size_t i = 0; i < va.size(); ++i)
      sse += (pred[static_cast<int>(i)] - y[va[i]]) * (pred[static_cast<int>(i)] - y[va[i]]);
  }
  CHECK(reported == doctest::Approx(std::sqrt(sse / 24)).epsilon(1e-12));
}

TEST_CASE("segmented PLS picks the informative block") {
  Rng rng(55);
  Eigen::MatrixXd X = random_matrix(rng, 40, 30);
  // signal lives in columns 20..29 (third segment of ten)
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i)
    y[i] = X.row(i).segment(20, 10).sum() + rng.normal(0.0, 0.05);

  const auto choice = segmented_pls(X, y, 10, 5, 7, 3);
  REQUIRE(choice.per_segment_rmsecv.size() == 3);
  CHECK(choice.best_segment == 2);
  CHECK(choice.per_segment_rmsecv[2] < choice.per_segment_rmsecv[0]);
  CHECK(choice.per_segment_rmsecv[2] < choice.per_segment_rmsecv[1]);

  // tail segment may be short: 30 columns in segments of 12 -> 12, 12, 6
  const auto ragged = segmented_pls(X, y, 12, 5, 7, 3);
  CHECK(ragged.per_segment_rmsecv.size() == 3);
}

TEST_CASE("fit rejects inconsistent shapes") {
  Rng rng(1);
  const auto X = random_matrix(rng, 8, 3);
  CHECK_THROWS_AS(static_cast<void>(pls_fit(X, Eigen::VectorXd::Ones(7), 2)), Error);
  CHECK_THROWS_AS(static_cast<void>(pls_fit(X, Eigen::VectorXd::Ones(8), -1)), Error);
}

}  // TEST_SUITE
