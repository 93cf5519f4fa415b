#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "spectral/error.hpp"
#include "spectral/nn.hpp"
#include "spectral/rng.hpp"

using namespace spectral;

namespace {

Eigen::MatrixXd random_inputs(Rng& rng, int n, int dim) {
  Eigen::MatrixXd X(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) X(i, j) = rng.normal(0.0, 1.0);
  return X;
}

// Architectures small enough for finite differences to stay well-conditioned.
ModelArch tiny(ArchKind kind, int input_dim) {
  ModelArch arch;
  arch.kind = kind;
  arch.input_dim = input_dim;
  arch.mlp_widths = {5, 4};
  arch.conv_channels = {2, 3};
  arch.conv_kernels = {{3, 1}, {1, 3}};
  arch.head_width = 3;
  if (kind == ArchKind::cnn || kind == ArchKind::cnn_mlp) {
    const int side = static_cast<int>(std::lround(std::sqrt(double(input_dim))));
    arch.wrap_side = side;
  }
  arch.validate();
  return arch;
}

double max_rel_grad_error(const ModelArch& arch, std::uint64_t seed) {
  Rng rng(seed);
  const int n = 7;
  const auto X = random_inputs(rng, n, arch.input_dim);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal(0.0, 1.0);

  Eigen::VectorXd params = glorot_init(arch, seed + 1);
  // nudge biases off zero so their gradients are generic
  for (int i = 0; i < params.size(); ++i)
    if (params[i] == 0.0) params[i] = 0.01 * rng.normal(0.0, 1.0);

  const auto analytic = nn_loss_and_grad(arch, params, X, y);
  const double h = 1e-6;
  double worst = 0;
  for (int i = 0; i < params.size(); ++i) {
    Eigen::VectorXd p = params;
    p[i] = params[i] + h;
    const double up = nn_loss(arch, p, X, y);
    p[i] = params[i] - h;
    const double down = nn_loss(arch, p, X, y);
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic.grad[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - analytic.grad[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("parameter layout matches hand-computed block sizes") {
  // mlp on 10 inputs with widths {5, 4}: 10*5+5 + 5*4+4 + 4*1+1 = 84
  const auto arch = tiny(ArchKind::mlp, 10);
  const auto layout = layout_for(arch);
  CHECK(layout.total == 84);

  int sum = 0;
  for (const auto& block : layout.blocks) {
    CHECK(block.offset == sum);
    int prod = 1;
    for (int d : block.dims) prod *= d;
    CHECK(prod == block.size);
    sum += block.size;
  }
  CHECK(sum == layout.total);
}

TEST_CASE("published layer sizes survive the factory") {
  const auto mlp = ModelArch::standard(ArchKind::mlp, 1600);
  CHECK(mlp.mlp_widths == std::vector<int>{512, 256, 128, 64, 32, 16});
  const auto layout = layout_for(mlp);
  // trunk + final scalar layer
  int expected = 1600 * 512 + 512 + 512 * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64 +
                 64 * 32 + 32 + 32 * 16 + 16 + 16 * 1 + 1;
  CHECK(layout.total == expected);

  const auto mlp_cnn = ModelArch::standard(ArchKind::mlp_cnn, 1600);
  CHECK(mlp_cnn.conv_channels == std::vector<int>{64, 64, 128, 128});
  CHECK(mlp_cnn.conv_kernels ==
        std::vector<std::pair<int, int>>{{3, 1}, {1, 3}, {3, 1}, {1, 3}});

  // cnn needs a square input
  CHECK(ModelArch::standard(ArchKind::cnn, 1600).wrap_side == 40);
  CHECK_THROWS_AS(static_cast<void>(ModelArch::standard(ArchKind::cnn, 1500)), Error);
}

TEST_CASE("self correlation is the outer product") {
  Eigen::VectorXd v(3);
  v << 2.0, -1.0, 0.5;
  const auto M = self_correlation(v);
  REQUIRE(M.rows() == 3);
  REQUIRE(M.cols() == 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(M(i, j) == doctest::Approx(v[i] * v[j]));
  CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initialization is deterministic, seed-sensitive, and bounded") {
  const auto arch = tiny(ArchKind::mlp, 12);
  const auto a = glorot_init(arch, 5);
  const auto b = glorot_init(arch, 5);
  const auto c = glorot_init(arch, 6);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

  // first dense block: fan_in 12, fan_out 5 -> |w| <= sqrt(6/17)
  const double limit = std::sqrt(6.0 / 17.0) + 1e-12;
  const auto layout = layout_for(arch);
  const auto& w0 = layout.blocks.front();
  for (int i = 0; i < w0.size; ++i) CHECK(std::abs(a[w0.offset + i]) <= limit);
}

TEST_CASE("gradients match central finite differences on every architecture") {
  CHECK(max_rel_grad_error(tiny(ArchKind::mlp, 10), 100) < 1e-4);
  CHECK(max_rel_grad_error(tiny(ArchKind::mlp_cnn, 10), 200) < 1e-4);
  CHECK(max_rel_grad_error(tiny(ArchKind::cnn, 9), 300) < 1e-4);
  CHECK(max_rel_grad_error(tiny(ArchKind::cnn_mlp, 9), 400) < 1e-4);
}

TEST_CASE("forward pass is row-order independent") {
  const auto arch = tiny(ArchKind::mlp_cnn, 8);
  Rng rng(44);
  const auto X = random_inputs(rng, 5, 8);
  const auto params = glorot_init(arch, 3);
  const auto batch = nn_predict(arch, params, X);
  // predicting rows one by one gives the same values
  for (int i = 0; i < 5; ++i) {
    const Eigen::MatrixXd row = X.row(i);
    CHECK(nn_predict(arch, params, row)[0] == doctest::Approx(batch[i]).epsilon(1e-12));
  }
}

TEST_CASE("training reduces the loss on a learnable function") {
  const auto arch = tiny(ArchKind::mlp, 6);
  Rng rng(50);
  const auto X = random_inputs(rng, 40, 6);
  Eigen::VectorXd y = X * Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);

  TrainConfig config;
  config.epochs = 400;
  config.learning_rate = 1e-2;
  config.optimizer = Optimizer::adam;
  config.seed = 7;

  const auto result = nn_train(arch, X, y, config);
  REQUIRE(result.loss_trace.size() == 401);
  CHECK(result.loss_trace.back() < 0.3 * result.loss_trace.front());

  // the trace's final entry describes the returned parameters
  const double rmse_now = std::sqrt(nn_loss(arch, result.params, X, y));
  CHECK(result.loss_trace.back() == doctest::Approx(rmse_now).epsilon(1e-12));
}

TEST_CASE("training is deterministic") {
  const auto arch = tiny(ArchKind::mlp, 5);
  Rng rng(60);
  const auto X = random_inputs(rng, 20, 5);
  Eigen::VectorXd y = X.col(0) - X.col(3);

  TrainConfig config;
  config.epochs = 50;
  config.learning_rate = 5e-3;
  config.optimizer = Optimizer::adam;
  config.seed = 11;

  const auto a = nn_train(arch, X, y, config);
  const auto b = nn_train(arch, X, y, config);
  CHECK((a.params - b.params).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("diverging training reports the epoch") {
  const auto arch = tiny(ArchKind::mlp, 5);
  Rng rng(70);
  const auto X = 100.0 * random_inputs(rng, 10, 5);
  Eigen::VectorXd y = 1000.0 * X.col(0);

  TrainConfig config;
  config.epochs = 200;
  config.learning_rate = 1e6;  // guaranteed blowup
  config.optimizer = Optimizer::gradient_descent;
  config.seed = 1;

  CHECK_THROWS_WITH_AS(static_cast<void>(nn_train(arch, X, y, config)),
                       doctest::Contains("diverged at epoch"), Error);
}

TEST_CASE("models round-trip through the file format") {
  const auto arch = tiny(ArchKind::cnn_mlp, 9);
  const auto params = glorot_init(arch, 21);
  const std::string path = "/tmp/spectral_test_model.bin";
  save_model(arch, params, path);

  const auto loaded = load_model(path);
  CHECK(loaded.arch.kind == arch.kind);
  CHECK(loaded.arch.input_dim == arch.input_dim);
  CHECK(loaded.arch.mlp_widths == arch.mlp_widths);
  CHECK(loaded.arch.conv_channels == arch.conv_channels);
  CHECK(loaded.arch.conv_kernels == arch.conv_kernels);
  CHECK(loaded.arch.wrap_side == arch.wrap_side);
  CHECK(loaded.arch.head_width == arch.head_width);
  CHECK(loaded.feat_mean.size() == 0);  // no scaler attached
  CHECK((loaded.params - params).cwiseAbs().maxCoeff() == 0.0);

  // predictions survive the round trip bit-exactly
  Rng rng(5);
  const auto X = random_inputs(rng, 4, 9);
  CHECK((nn_predict(arch, params, X) - nn_predict(loaded.arch, loaded.params, X))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("model loader rejects damaged files") {
  const auto arch = tiny(ArchKind::mlp, 6);
  const auto params = glorot_init(arch, 2);
  const std::string path = "/tmp/spectral_test_model_bad.bin";

  SUBCASE("wrong magic") {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE1234 garbage";
    out.close();
    CHECK_THROWS_AS(static_cast<void>(load_model(path)), Error);
  }
  SUBCASE("truncated parameters") {
    save_model(arch, params, path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 24));
    out.close();
    CHECK_THROWS_AS(static_cast<void>(load_model(path)), Error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(static_cast<void>(load_model("/tmp/spectral_no_such_model.bin")),
                    Error);
  }
  std::remove(path.c_str());
}

TEST_CASE("architecture validation catches inconsistent shapes") {
  ModelArch arch;
  arch.kind = ArchKind::cnn;
  arch.input_dim = 10;  // not a perfect square
  arch.wrap_side = 3;
  CHECK_THROWS_AS(arch.validate(), Error);

  arch = ModelArch::standard(ArchKind::mlp, 100);
  arch.mlp_widths.clear();
  CHECK_THROWS_AS(arch.validate(), Error);

  arch = ModelArch::standard(ArchKind::mlp_cnn, 100);
  arch.conv_kernels = {{2, 1}, {1, 3}, {3, 1}, {1, 3}};  // even kernel
  CHECK_THROWS_AS(arch.validate(), Error);

  arch = ModelArch::standard(ArchKind::mlp_cnn, 100);
  arch.conv_channels.pop_back();  // kernel/channel count mismatch
  CHECK_THROWS_AS(arch.validate(), Error);
}

}  // TEST_SUITE
