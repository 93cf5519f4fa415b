#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "spectral/error.hpp"
#include "spectral/preprocess.hpp"
#include "spectral/rng.hpp"

using namespace spectral;

namespace {

Eigen::VectorXd sampled(int n, double (*f)(double)) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = f(static_cast<double>(i));
  return v;
}

Eigen::MatrixXd random_block(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.normal(0.0, 1.0);
  return X;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("strategy grammar accepts the documented forms") {
  const auto plain = parse_strategy("Non>PLS");
  CHECK(plain.steps.empty());
  CHECK(plain.model == ModelKind::pls);
  CHECK(plain.text == "Non>PLS");

  const auto chain = parse_strategy("SG>MSC>SNV>WD(400)>GA(100)>PLS");
  REQUIRE(chain.steps.size() == 5);
  CHECK(chain.steps[0].kind == StepKind::sg);
  CHECK(chain.steps[1].kind == StepKind::msc);
  CHECK(chain.steps[2].kind == StepKind::snv);
  CHECK(chain.steps[3].kind == StepKind::wd);
  CHECK(chain.steps[3].arg == 400);
  CHECK(chain.steps[4].kind == StepKind::ga);
  CHECK(chain.steps[4].arg == 100);

  // whitespace anywhere is ignored
  const auto spaced = parse_strategy("  SG > MSC\t> SNV > WD( 400 ) > GA(100) > PLS ");
  CHECK(spaced.text == chain.text);

  CHECK(parse_strategy("D1>PLS").steps[0].kind == StepKind::d1);
  CHECK(parse_strategy("D2>PLS").steps[0].kind == StepKind::d2);
  CHECK(parse_strategy("PCA(12)>PLS").steps[0].arg == 12);
  CHECK(parse_strategy("Non>SEGPLS(50)").model == ModelKind::segpls);
  CHECK(parse_strategy("Non>SEGPLS(50)").model_arg == 50);
  CHECK(parse_strategy("Non>MLP").model == ModelKind::mlp);
  CHECK(parse_strategy("Non>CNN").model == ModelKind::cnn);
  CHECK(parse_strategy("Non>CNN-MLP").model == ModelKind::cnn_mlp);
  CHECK(parse_strategy("SNV>MLP-CNN").model == ModelKind::mlp_cnn);
}

TEST_CASE("strategy grammar rejects malformed texts") {
  for (const char* bad :
       {"", "PLS", "Non", "SG>MSC", "Non>SG>PLS", "BOGUS>PLS", "SG>>PLS",
        "WD>PLS", "WD()>PLS", "WD(x)>PLS", "GA(-5)>PLS", "PCA(0)>PLS",
        "SG>UNKNOWN", "Non>PLS>SG", "SEGPLS>Non", "Non>SEGPLS", "sg>pls"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(static_cast<void>(parse_strategy(bad)), Error);
  }
}

TEST_CASE("strategy rendering is canonical") {
  const auto s = parse_strategy(" WD(400) > GA( 100 ) > SEGPLS(25) ");
  CHECK(render_strategy(s) == "WD(400)>GA(100)>SEGPLS(25)");
}

TEST_CASE("smoothing preserves polynomials up to the fit degree") {
  // degree-2 polynomial through a quadratic fit must pass unchanged,
  // including at the boundary rows
  const auto quad = sampled(41, [](double t) { return 0.3 * t * t - 2.0 * t + 7.0; });
  const auto out = sg_smooth(quad, 11, 2);
  CHECK((out - quad).cwiseAbs().maxCoeff() < 1e-9);

  const auto line = sampled(15, [](double t) { return 4.0 * t - 3.0; });
  CHECK((sg_smooth(line, 5, 2) - line).cwiseAbs().maxCoeff() < 1e-10);

  // a cubic is NOT preserved by a quadratic fit
  const auto cubic = sampled(41, [](double t) { return t * t * t; });
  CHECK((sg_smooth(cubic, 11, 2) - cubic).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("smoothing impulse response matches the solved coefficients") {
  // push a unit impulse through a 5-point quadratic smoother and read the
  // filter taps around it: the classic (-3, 12, 17, 12, -3) / 35 vector
  Eigen::VectorXd impulse = Eigen::VectorXd::Zero(21);
  impulse[10] = 1.0;
  const auto response = sg_smooth(impulse, 5, 2);
  const double expected[5] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
  for (int k = -2; k <= 2; ++k)
    CHECK(response[10 + k] == doctest::Approx(expected[k + 2]).epsilon(1e-12));

  // independent oracle: center row of the hat matrix V (V^T V)^{-1} V^T,
  // solved here with a plain 3x3 inverse rather than the library path
  Eigen::MatrixXd V(5, 3);
  for (int i = 0; i < 5; ++i) {
    const double t = i - 2;
    V(i, 0) = 1;
    V(i, 1) = t;
    V(i, 2) = t * t;
  }
  const Eigen::MatrixXd G = (V.transpose() * V).inverse();
  const Eigen::VectorXd center_row = V * (G * V.row(2).transpose());
  CHECK(response[10] == doctest::Approx(center_row[2]).epsilon(1e-12));
  CHECK(center_row[2] == doctest::Approx(17.0 / 35.0).epsilon(1e-12));
}

TEST_CASE("smoothing validates the window") {
  const auto x = sampled(20, [](double t) { return t; });
  CHECK_THROWS_AS(static_cast<void>(sg_smooth(x, 4, 2)), Error);   // even window
  CHECK_THROWS_AS(static_cast<void>(sg_smooth(x, 5, 5)), Error);   // order >= window
  CHECK_THROWS_AS(static_cast<void>(sg_smooth(x, 21, 2)), Error);  // window > length
}

TEST_CASE("standard normal variate centers and scales each spectrum") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(50);
    for (int i = 0; i < 50; ++i) x[i] = rng.normal(3.0, 2.5);
    const auto z = snv(x);
    CHECK(std::abs(z.mean()) < 1e-12);
    const double pop_var = z.squaredNorm() / 50.0 - z.mean() * z.mean();
    CHECK(std::sqrt(pop_var) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(static_cast<void>(snv(Eigen::VectorXd::Constant(10, 2.0))), Error);
}

TEST_CASE("derivatives reduce polynomial degree") {
  const auto line = sampled(30, [](double t) { return 4.0 * t + 1.0; });
  const auto d1 = derivative(line, 1);
  CHECK((d1.array() - 4.0).abs().maxCoeff() < 1e-10);

  const auto quad = sampled(30, [](double t) { return t * t; });
  const auto d2 = derivative(quad, 2);
  // interior of the second derivative of t^2 is exactly 2
  for (int i = 2; i < 28; ++i) CHECK(d2[i] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("wavelet stage preserves energy and halves dimension") {
  Rng rng(6);
  Eigen::VectorXd x(64);
  for (int i = 0; i < 64; ++i) x[i] = rng.normal(0.0, 1.0);
  const auto [approx, detail] = haar_stage(x);
  REQUIRE(approx.size() == 32);
  REQUIRE(detail.size() == 32);
  CHECK(approx.squaredNorm() + detail.squaredNorm() ==
        doctest::Approx(x.squaredNorm()).epsilon(1e-10));

  // orthonormal scaling: constant input keeps its mean level scaled by sqrt(2)
  const auto [capprox, cdetail] = haar_stage(Eigen::VectorXd::Constant(8, 3.0));
  CHECK((capprox.array() - 3.0 * std::sqrt(2.0)).abs().maxCoeff() < 1e-12);
  CHECK(cdetail.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("wavelet decomposition runs whole stages only") {
  Rng rng(8);
  Eigen::VectorXd x(1600);
  for (int i = 0; i < 1600; ++i) x[i] = rng.normal(0.0, 1.0);

  CHECK(wavelet_decompose(x, 400).size() == 400);   // two stages
  CHECK(wavelet_decompose(x, 100).size() == 100);   // four stages
  CHECK(wavelet_decompose(x, 1600).size() == 1600); // zero stages

  // two manual stages equal the 1600 -> 400 decomposition
  const auto once = haar_stage(x).first;
  const auto twice = haar_stage(once).first;
  CHECK((wavelet_decompose(x, 400) - twice).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(static_cast<void>(wavelet_decompose(x, 300)), Error);
  CHECK_THROWS_AS(static_cast<void>(wavelet_decompose(x, 0)), Error);
  // 1600 = 25 * 2^6: halving below 25 is impossible
  CHECK_THROWS_AS(static_cast<void>(wavelet_decompose(x, 5)), Error);
}

TEST_CASE("scatter correction removes exact affine distortions") {
  Rng rng(12);
  Eigen::VectorXd clean(80);
  for (int i = 0; i < 80; ++i) clean[i] = 1.0 + std::sin(0.1 * i) + rng.normal(0.0, 0.1);

  Eigen::MatrixXd train(6, 80);
  std::vector<double> slopes = {1.1, 0.9, 1.3, 0.7, 1.05, 0.95};
  std::vector<double> offsets = {0.2, -0.1, 0.05, 0.3, -0.25, 0.0};
  for (int i = 0; i < 6; ++i) train.row(i) = (slopes[i] * clean.array() + offsets[i]).matrix();

  const auto ref = msc_reference(train);
  for (int i = 0; i < 6; ++i) {
    const Eigen::VectorXd corrected = msc_apply(train.row(i), ref);
    CHECK((corrected - ref).cwiseAbs().maxCoeff() < 1e-10);
  }

  // flat spectrum has no slope against the reference
  CHECK_THROWS_AS(static_cast<void>(msc_apply(Eigen::VectorXd::Constant(80, 1.0), ref)),
                  Error);
}

TEST_CASE("pca reconstructs data of known rank") {
  Rng rng(14);
  const auto T = random_block(rng, 40, 3);
  const auto P = random_block(rng, 20, 3);
  const Eigen::MatrixXd X =
      (T * P.transpose()).rowwise() + Eigen::RowVectorXd::Constant(20, 5.0);

  const auto model = pca_fit(X, 3);
  REQUIRE(model.basis.cols() == 3);
  // orthonormal basis
  CHECK((model.basis.transpose() * model.basis - Eigen::MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  // scores reproduce the centered data through the basis
  const auto scores = pca_apply(model, X);
  const Eigen::MatrixXd reconstructed =
      (scores * model.basis.transpose()).rowwise() + model.mean.transpose();
  CHECK((reconstructed - X).cwiseAbs().maxCoeff() < 1e-9);

  // deterministic sign: largest-magnitude loading of each column is positive
  for (int c = 0; c < 3; ++c) {
    Eigen::Index arg = 0;
    model.basis.col(c).cwiseAbs().maxCoeff(&arg);
    CHECK(model.basis(arg, c) > 0.0);
  }

  CHECK_THROWS_AS(static_cast<void>(pca_fit(X, 40)), Error);  // k > n-1
}

TEST_CASE("chain fitting learns its state from the training block only") {
  Rng rng(18);
  Eigen::VectorXd clean(64);
  for (int i = 0; i < 64; ++i) clean[i] = 1.0 + std::sin(0.2 * i);

  // train rows are affine distortions of the clean shape; the apply block
  // has a wildly different scale that must not influence the reference
  Eigen::MatrixXd train(5, 64), apply(2, 64);
  for (int i = 0; i < 5; ++i)
    train.row(i) = ((1.0 + 0.1 * i) * clean.array() + 0.05 * i).matrix();
  apply.row(0) = (100.0 * clean.array() + 3.0).matrix();
  apply.row(1) = (0.01 * clean.array() - 2.0).matrix();

  const auto steps = parse_strategy("MSC>PLS").steps;
  const auto result = chain_fit_apply(steps, train, Eigen::VectorXd::Ones(5), apply, {});
  REQUIRE(result.chain.steps.size() == 1);
  // the reference equals the train mean, untouched by the apply block
  CHECK((result.chain.steps[0].msc_ref -
         Eigen::VectorXd(train.colwise().mean().transpose()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  // both apply rows collapse onto the reference shape
  for (int i = 0; i < 2; ++i)
    CHECK((result.applied.row(i).transpose() - result.chain.steps[0].msc_ref)
              .cwiseAbs()
              .maxCoeff() < 1e-9);
}

TEST_CASE("fitted chains transform later blocks exactly like the fit did") {
  Rng rng(19);
  Eigen::MatrixXd train = random_block(rng, 12, 32);
  Eigen::MatrixXd apply = random_block(rng, 4, 32);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) y[i] = rng.normal(10.0, 1.0);

  const auto steps = parse_strategy("SG>SNV>WD(16)>PCA(5)>PLS").steps;
  const auto result = chain_fit_apply(steps, train, y, apply, {});
  CHECK(result.train.cols() == 5);
  CHECK(result.applied.cols() == 5);
  // re-applying the fitted chain reproduces the fit-time transform
  CHECK((result.chain.apply(apply) - result.applied).cwiseAbs().maxCoeff() == 0.0);
  CHECK((result.chain.apply(train) - result.train).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("chain errors carry the failing step position") {
  Rng rng(20);
  const auto train = random_block(rng, 6, 30);
  const auto steps = parse_strategy("WD(7)>PLS").steps;  // 30 cannot halve to 7
  CHECK_THROWS_WITH_AS(
      static_cast<void>(chain_fit_apply(steps, train, Eigen::VectorXd::Ones(6),
                                        Eigen::MatrixXd(0, 30), {})),
      doctest::Contains("step 1 (WD(7))"), Error);
}

TEST_CASE("empty apply blocks pass through") {
  Rng rng(22);
  const auto train = random_block(rng, 8, 16);
  const auto steps = parse_strategy("SNV>PLS").steps;
  const auto result =
      chain_fit_apply(steps, train, Eigen::VectorXd::Ones(8), Eigen::MatrixXd(0, 16), {});
  CHECK(result.applied.rows() == 0);
  CHECK(result.train.rows() == 8);
}

}  // TEST_SUITE
