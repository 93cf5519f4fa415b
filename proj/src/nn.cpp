#include "spectral/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>

#include "spectral/error.hpp"
#include "spectral/rng.hpp"

namespace spectral {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Batches are row-major inside this module: one sample per contiguous row,
/// feature (c, h, w) at column (c * H + h) * W + w. Contiguity is what lets
/// the conv and self-correlation layers treat rows as raw planes.
using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMajorConst =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMajorMut =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

struct Shape {
  int c = 1, h = 1, w = 1;
  int flat() const { return c * h * w; }
};

struct Layer {
  Shape in, out;
  virtual ~Layer() = default;
  virtual void forward(const Batch& x, const VectorXd& params, Batch& y) const = 0;
  /// Accumulates into grad; overwrites dx (resized to n x in.flat()).
  virtual void backward(const Batch& x, const Batch& dy, const VectorXd& params,
                        VectorXd& grad, Batch& dx) const = 0;
};

struct DenseLayer final : Layer {
  int w_off = 0, b_off = 0;

  void forward(const Batch& x, const VectorXd& params, Batch& y) const override {
    const RowMajorConst W(params.data() + w_off, out.flat(), in.flat());
    y.noalias() = x * W.transpose();
    y.rowwise() += params.segment(b_off, out.flat()).transpose();
  }

  void backward(const Batch& x, const Batch& dy, const VectorXd& params,
                VectorXd& grad, Batch& dx) const override {
    const RowMajorConst W(params.data() + w_off, out.flat(), in.flat());
    RowMajorMut dW(grad.data() + w_off, out.flat(), in.flat());
    dW.noalias() += dy.transpose() * x;
    grad.segment(b_off, out.flat()) += dy.colwise().sum().transpose();
    dx.noalias() = dy * W;
  }
};

struct ReluLayer final : Layer {
  void forward(const Batch& x, const VectorXd&, Batch& y) const override {
    y = x.cwiseMax(0.0);
  }
  void backward(const Batch& x, const Batch& dy, const VectorXd&, VectorXd&,
                Batch& dx) const override {
    // Subgradient 0 at the kink.
    dx = (x.array() > 0.0).select(dy, Batch::Zero(dy.rows(), dy.cols()));
  }
};

/// Outer product of each sample's vector with itself: (1,1,d) -> (1,d,d).
struct SelfCorrLayer final : Layer {
  void forward(const Batch& x, const VectorXd&, Batch& y) const override {
    const int d = in.flat();
    y.resize(x.rows(), d * d);
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      RowMajorMut m(y.row(s).data(), d, d);
      m.noalias() = x.row(s).transpose() * x.row(s);
    }
  }
  void backward(const Batch& x, const Batch& dy, const VectorXd&, VectorXd&,
                Batch& dx) const override {
    const int d = in.flat();
    dx.resize(x.rows(), d);
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      const RowMajorConst dm(dy.row(s).data(), d, d);
      dx.row(s).noalias() = x.row(s) * (dm + dm.transpose());
    }
  }
};

/// Pure shape reinterpretation; the flat layout already matches.
struct ReshapeLayer final : Layer {
  void forward(const Batch& x, const VectorXd&, Batch& y) const override { y = x; }
  void backward(const Batch&, const Batch& dy, const VectorXd&, VectorXd&,
                Batch& dx) const override {
    dx = dy;
  }
};

/// Same-padded 2D convolution with odd kernels, via per-sample im2col.
struct ConvLayer final : Layer {
  int kh = 1, kw = 1;
  int k_off = 0, b_off = 0;

  int patch() const { return in.c * kh * kw; }

  void fill_col(const double* xrow, Batch& col) const {
    const int H = in.h, W = in.w, ph = kh / 2, pw = kw / 2;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const int r = y * W + x;
        int cc = 0;
        for (int c = 0; c < in.c; ++c) {
          const double* plane = xrow + c * H * W;
          for (int dy = 0; dy < kh; ++dy) {
            const int sy = y + dy - ph;
            for (int dx = 0; dx < kw; ++dx) {
              const int sx = x + dx - pw;
              col(r, cc++) = (sy >= 0 && sy < H && sx >= 0 && sx < W)
                                 ? plane[sy * W + sx]
                                 : 0.0;
            }
          }
        }
      }
    }
  }

  void forward(const Batch& x, const VectorXd& params, Batch& y) const override {
    const int hw = in.h * in.w;
    const RowMajorConst K(params.data() + k_off, out.c, patch());
    const auto bias = params.segment(b_off, out.c);
    y.resize(x.rows(), out.flat());
    Batch col(hw, patch());
    Batch out_s(hw, out.c);
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      fill_col(x.row(s).data(), col);
      out_s.noalias() = col * K.transpose();
      double* yrow = y.row(s).data();
      for (int o = 0; o < out.c; ++o) {
        RowMajorMut(yrow + o * hw, hw, 1).noalias() =
            out_s.col(o) + VectorXd::Constant(hw, bias[o]);
      }
    }
  }

  void backward(const Batch& x, const Batch& dy, const VectorXd& params,
                VectorXd& grad, Batch& dx) const override {
    const int hw = in.h * in.w;
    const int H = in.h, W = in.w, ph = kh / 2, pw = kw / 2;
    const RowMajorConst K(params.data() + k_off, out.c, patch());
    RowMajorMut dK(grad.data() + k_off, out.c, patch());
    auto db = grad.segment(b_off, out.c);

    dx.setZero(x.rows(), in.flat());
    Batch col(hw, patch());
    Batch dout_s(hw, out.c);
    Batch dcol(hw, patch());
    for (Eigen::Index s = 0; s < x.rows(); ++s) {
      fill_col(x.row(s).data(), col);
      const double* dyrow = dy.row(s).data();
      for (int o = 0; o < out.c; ++o) {
        dout_s.col(o) = RowMajorConst(dyrow + o * hw, hw, 1);
      }
      dK.noalias() += dout_s.transpose() * col;
      db += dout_s.colwise().sum().transpose();
      dcol.noalias() = dout_s * K;

      // col2im: scatter-add each patch entry back to its source pixel.
      double* dxrow = dx.row(s).data();
      for (int y = 0; y < H; ++y) {
        for (int xpos = 0; xpos < W; ++xpos) {
          const int r = y * W + xpos;
          int cc = 0;
          for (int c = 0; c < in.c; ++c) {
            double* plane = dxrow + c * H * W;
            for (int dy2 = 0; dy2 < kh; ++dy2) {
              const int sy = y + dy2 - ph;
              for (int dx2 = 0; dx2 < kw; ++dx2) {
                const int sx = xpos + dx2 - pw;
                if (sy >= 0 && sy < H && sx >= 0 && sx < W) {
                  plane[sy * W + sx] += dcol(r, cc);
                }
                ++cc;
              }
            }
          }
        }
      }
    }
  }
};

struct Net {
  std::vector<std::unique_ptr<Layer>> layers;
  ParamLayout layout;
};

int isqrt_exact(int v) {
  const int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v))));
  return (r * r == v) ? r : -1;
}

Net build_net(const ModelArch& arch) {
  arch.validate();
  Net net;

  auto add_block = [&](const std::string& name, std::vector<int> dims) {
    ParamBlock block;
    block.name = name;
    block.dims = std::move(dims);
    block.size = 1;
    for (const int d : block.dims) block.size *= d;
    block.offset = net.layout.total;
    net.layout.total += block.size;
    net.layout.blocks.push_back(block);
    return block.offset;
  };

  Shape cur{1, 1, arch.input_dim};

  auto add_dense = [&](const std::string& name, int width) {
    auto layer = std::make_unique<DenseLayer>();
    layer->in = cur;
    layer->out = Shape{1, 1, width};
    layer->w_off = add_block(name + ".w", {width, cur.flat()});
    layer->b_off = add_block(name + ".b", {width});
    cur = layer->out;
    net.layers.push_back(std::move(layer));
  };
  auto add_relu = [&] {
    auto layer = std::make_unique<ReluLayer>();
    layer->in = layer->out = cur;
    net.layers.push_back(std::move(layer));
  };
  auto add_conv = [&](const std::string& name, int channels, std::pair<int, int> kernel) {
    auto layer = std::make_unique<ConvLayer>();
    layer->in = cur;
    layer->out = Shape{channels, cur.h, cur.w};
    layer->kh = kernel.first;
    layer->kw = kernel.second;
    layer->k_off = add_block(name + ".k", {channels, cur.c, kernel.first, kernel.second});
    layer->b_off = add_block(name + ".b", {channels});
    cur = layer->out;
    net.layers.push_back(std::move(layer));
  };
  // Full-extent convolution: one kernel spanning the whole map, no padding,
  // so the output is a single scalar. Algebraically a dense map; the block
  // dims keep the kernel shape.
  auto add_full_conv = [&] {
    auto layer = std::make_unique<DenseLayer>();
    layer->in = cur;
    layer->out = Shape{1, 1, 1};
    layer->w_off = add_block("conv_out.k", {1, cur.c, cur.h, cur.w});
    layer->b_off = add_block("conv_out.b", {1});
    cur = layer->out;
    net.layers.push_back(std::move(layer));
  };
  auto add_reshape = [&](Shape to) {
    auto layer = std::make_unique<ReshapeLayer>();
    layer->in = cur;
    layer->out = to;
    cur = to;
    net.layers.push_back(std::move(layer));
  };
  auto add_conv_stack = [&] {
    for (std::size_t i = 0; i < arch.conv_channels.size(); ++i) {
      add_conv("conv" + std::to_string(i), arch.conv_channels[i], arch.conv_kernels[i]);
      add_relu();
    }
  };

  switch (arch.kind) {
    case ArchKind::mlp: {
      for (std::size_t i = 0; i < arch.mlp_widths.size(); ++i) {
        add_dense("dense" + std::to_string(i), arch.mlp_widths[i]);
        add_relu();
      }
      add_dense("out", 1);
      break;
    }
    case ArchKind::mlp_cnn: {
      for (std::size_t i = 0; i < arch.mlp_widths.size(); ++i) {
        add_dense("dense" + std::to_string(i), arch.mlp_widths[i]);
        add_relu();
      }
      const int d = arch.mlp_widths.back();
      auto layer = std::make_unique<SelfCorrLayer>();
      layer->in = cur;
      layer->out = Shape{1, d, d};
      cur = layer->out;
      net.layers.push_back(std::move(layer));
      add_conv_stack();
      add_full_conv();
      break;
    }
    case ArchKind::cnn: {
      add_reshape(Shape{1, arch.wrap_side, arch.wrap_side});
      add_conv_stack();
      add_full_conv();
      break;
    }
    case ArchKind::cnn_mlp: {
      add_reshape(Shape{1, arch.wrap_side, arch.wrap_side});
      add_conv_stack();
      add_reshape(Shape{1, 1, cur.flat()});
      add_dense("head", arch.head_width);
      add_relu();
      add_dense("out", 1);
      break;
    }
  }
  return net;
}

VectorXd forward_net(const Net& net, const VectorXd& params, const Batch& X,
                     std::vector<Batch>* inputs) {
  Batch cur = X;
  Batch next;
  for (const auto& layer : net.layers) {
    layer->forward(cur, params, next);
    if (inputs) {
      inputs->push_back(std::move(cur));
    }
    cur.swap(next);
  }
  return cur.col(0);
}

}  // namespace

void ModelArch::validate() const {
  require(input_dim >= 1, ErrorCode::invalid_argument, "arch: input_dim must be positive");
  const bool has_mlp = kind == ArchKind::mlp || kind == ArchKind::mlp_cnn;
  const bool has_conv = kind != ArchKind::mlp;
  const bool has_wrap = kind == ArchKind::cnn || kind == ArchKind::cnn_mlp;

  if (has_mlp) {
    require(!mlp_widths.empty(), ErrorCode::invalid_argument, "arch: no dense widths");
    for (const int w : mlp_widths) {
      require(w >= 1, ErrorCode::invalid_argument, "arch: dense widths must be positive");
    }
  }
  if (has_conv) {
    require(!conv_channels.empty(), ErrorCode::invalid_argument, "arch: no conv layers");
    require(conv_channels.size() == conv_kernels.size(), ErrorCode::invalid_argument,
            "arch: conv channel and kernel lists differ in length");
    for (const int c : conv_channels) {
      require(c >= 1, ErrorCode::invalid_argument, "arch: conv channels must be positive");
    }
    for (const auto& [kh, kw] : conv_kernels) {
      require(kh >= 1 && kw >= 1 && kh % 2 == 1 && kw % 2 == 1,
              ErrorCode::invalid_argument, "arch: conv kernels must be odd and positive");
    }
  }
  if (has_wrap) {
    require(wrap_side >= 1 && wrap_side * wrap_side == input_dim,
            ErrorCode::invalid_argument,
            "arch: input_dim must equal wrap_side squared");
  }
  if (kind == ArchKind::cnn_mlp) {
    require(head_width >= 1, ErrorCode::invalid_argument,
            "arch: head width must be positive");
  }
}

ModelArch ModelArch::standard(ArchKind kind, int input_dim) {
  ModelArch arch;
  arch.kind = kind;
  arch.input_dim = input_dim;
  if (kind == ArchKind::cnn || kind == ArchKind::cnn_mlp) {
    const int side = isqrt_exact(input_dim);
    require(side > 0, ErrorCode::invalid_argument,
            "arch: conv input of " + std::to_string(input_dim) +
                " features is not a perfect square");
    arch.wrap_side = side;
  }
  arch.validate();
  return arch;
}

ModelArch ModelArch::reduced(ArchKind kind, int input_dim) {
  ModelArch arch;
  arch.kind = kind;
  arch.input_dim = input_dim;
  arch.mlp_widths = {24, 8};
  arch.conv_channels = {3, 3, 4, 4};
  arch.conv_kernels = {{3, 1}, {1, 3}, {3, 1}, {1, 3}};
  arch.head_width = 8;
  if (kind == ArchKind::cnn || kind == ArchKind::cnn_mlp) {
    const int side = isqrt_exact(input_dim);
    require(side > 0, ErrorCode::invalid_argument,
            "arch: conv input of " + std::to_string(input_dim) +
                " features is not a perfect square");
    arch.wrap_side = side;
  }
  arch.validate();
  return arch;
}

ParamLayout layout_for(const ModelArch& arch) { return build_net(arch).layout; }

Eigen::VectorXd glorot_init(const ModelArch& arch, std::uint64_t seed) {
  const Net net = build_net(arch);
  VectorXd params = VectorXd::Zero(net.layout.total);
  Rng rng(seed);
  for (const auto& block : net.layout.blocks) {
    if (block.name.size() >= 2 && block.name.compare(block.name.size() - 2, 2, ".b") == 0) {
      continue;  // biases stay zero
    }
    // Dense blocks are {out, in}; conv blocks {cout, cin, kh, kw} use the
    // receptive-field convention fan = channels * kernel area.
    int fan_in = 1, fan_out = 1;
    if (block.dims.size() == 2) {
      fan_out = block.dims[0];
      fan_in = block.dims[1];
    } else {
      const int klen = block.dims[2] * block.dims[3];
      fan_out = block.dims[0] * klen;
      fan_in = block.dims[1] * klen;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < block.size; ++i) {
      params[block.offset + i] = rng.uniform(-limit, limit);
    }
  }
  return params;
}

Eigen::VectorXd nn_predict(const ModelArch& arch, const Eigen::VectorXd& params,
                           const Eigen::MatrixXd& X) {
  const Net net = build_net(arch);
  require(params.size() == net.layout.total, ErrorCode::invalid_argument,
          "nn: parameter vector has the wrong length");
  require(X.cols() == arch.input_dim, ErrorCode::invalid_argument,
          "nn: input width does not match the architecture");
  return forward_net(net, params, Batch(X), nullptr);
}

double nn_loss(const ModelArch& arch, const Eigen::VectorXd& params,
               const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  require(X.rows() == y.size() && X.rows() > 0, ErrorCode::invalid_argument,
          "nn: sample count does not match target length");
  const VectorXd pred = nn_predict(arch, params, X);
  return (pred - y).squaredNorm() / static_cast<double>(X.rows());
}

LossGrad nn_loss_and_grad(const ModelArch& arch, const Eigen::VectorXd& params,
                          const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Net net = build_net(arch);
  require(params.size() == net.layout.total, ErrorCode::invalid_argument,
          "nn: parameter vector has the wrong length");
  require(X.cols() == arch.input_dim, ErrorCode::invalid_argument,
          "nn: input width does not match the architecture");
  require(X.rows() == y.size() && X.rows() > 0, ErrorCode::invalid_argument,
          "nn: sample count does not match target length");

  std::vector<Batch> inputs;
  inputs.reserve(net.layers.size());
  const VectorXd pred = forward_net(net, params, Batch(X), &inputs);

  LossGrad result;
  const double n = static_cast<double>(X.rows());
  result.mse = (pred - y).squaredNorm() / n;
  result.grad = VectorXd::Zero(net.layout.total);

  Batch delta = (2.0 / n) * (pred - y);
  Batch dx;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    net.layers[i]->backward(inputs[i], delta, params, result.grad, dx);
    delta.swap(dx);
  }
  return result;
}

TrainResult nn_train(const ModelArch& arch, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const TrainConfig& config) {
  require(config.epochs >= 0, ErrorCode::invalid_argument, "nn: negative epoch count");
  require(config.learning_rate > 0, ErrorCode::invalid_argument,
          "nn: learning rate must be positive");

  TrainResult result;
  result.params = glorot_init(arch, config.seed);
  // Start the output bias at the target mean. From a zero bias the first
  // gradients are proportional to the full target magnitude, large enough on
  // real-scale targets to push every hidden unit into the dead ReLU region.
  if (y.size() > 0) {
    const Net net = build_net(arch);
    result.params[net.layout.blocks.back().offset] = y.mean();
  }
  result.loss_trace.reserve(static_cast<std::size_t>(config.epochs) + 1);

  VectorXd m, v;
  if (config.optimizer == Optimizer::adam) {
    m = VectorXd::Zero(result.params.size());
    v = VectorXd::Zero(result.params.size());
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  auto check_finite = [&](double mse, int epoch) {
    if (std::isfinite(mse)) return;
    const std::string last =
        result.loss_trace.empty()
            ? std::string("no finite loss was recorded")
            : "last finite loss " + std::to_string(result.loss_trace.back());
    fail(ErrorCode::numeric, "nn: training diverged at epoch " +
                                 std::to_string(epoch) + " (" + last + ")");
  };

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const LossGrad lg = nn_loss_and_grad(arch, result.params, X, y);
    check_finite(lg.mse, epoch);
    result.loss_trace.push_back(std::sqrt(lg.mse));

    if (config.optimizer == Optimizer::adam) {
      m = beta1 * m + (1.0 - beta1) * lg.grad;
      v = beta2 * v.array() + (1.0 - beta2) * lg.grad.array().square();
      const double bc1 = 1.0 - std::pow(beta1, epoch);
      const double bc2 = 1.0 - std::pow(beta2, epoch);
      result.params.array() -=
          config.learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    } else {
      result.params -= config.learning_rate * lg.grad;
    }
  }

  const double final_mse = nn_loss(arch, result.params, X, y);
  check_finite(final_mse, config.epochs + 1);
  result.loss_trace.push_back(std::sqrt(final_mse));
  return result;
}

Eigen::MatrixXd self_correlation(const Eigen::VectorXd& v) {
  require(v.size() > 0, ErrorCode::invalid_argument, "self_correlation: empty vector");
  return v * v.transpose();
}

namespace {

void write_i32(std::ofstream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int32_t read_i32(std::ifstream& in) {
  std::int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void save_model(const ModelArch& arch, const Eigen::VectorXd& params,
                const std::string& path) {
  save_model(arch, params, path, Eigen::VectorXd(), Eigen::VectorXd());
}

void save_model(const ModelArch& arch, const Eigen::VectorXd& params,
                const std::string& path, const Eigen::VectorXd& feat_mean,
                const Eigen::VectorXd& feat_std) {
  arch.validate();
  require(params.size() == layout_for(arch).total, ErrorCode::invalid_argument,
          "save_model: parameter vector has the wrong length");
  require(feat_mean.size() == feat_std.size(), ErrorCode::invalid_argument,
          "save_model: scaler mean and std lengths differ");
  require(feat_mean.size() == 0 || feat_mean.size() == arch.input_dim,
          ErrorCode::invalid_argument,
          "save_model: scaler length does not match the input dimension");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");

  out.write("SPNN", 4);
  write_i32(out, 2);  // format version
  write_i32(out, static_cast<std::int32_t>(arch.kind));
  write_i32(out, arch.input_dim);
  write_i32(out, static_cast<std::int32_t>(arch.mlp_widths.size()));
  for (const int w : arch.mlp_widths) write_i32(out, w);
  write_i32(out, static_cast<std::int32_t>(arch.conv_channels.size()));
  for (const int c : arch.conv_channels) write_i32(out, c);
  for (const auto& [kh, kw] : arch.conv_kernels) {
    write_i32(out, kh);
    write_i32(out, kw);
  }
  write_i32(out, arch.wrap_side);
  write_i32(out, arch.head_width);
  write_i32(out, static_cast<std::int32_t>(feat_mean.size()));
  out.write(reinterpret_cast<const char*>(feat_mean.data()),
            static_cast<std::streamsize>(sizeof(double)) * feat_mean.size());
  out.write(reinterpret_cast<const char*>(feat_std.data()),
            static_cast<std::streamsize>(sizeof(double)) * feat_std.size());
  write_i32(out, static_cast<std::int32_t>(params.size()));
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(sizeof(double)) * params.size());
  out.flush();
  require(out.good(), ErrorCode::io, "write to '" + path + "' failed");
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "' for reading");

  char magic[4] = {};
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, "SPNN", 4) == 0, ErrorCode::parse,
          "'" + path + "' is not a saved model");
  require(read_i32(in) == 2, ErrorCode::parse, "unsupported model format version");

  ModelArch arch;
  const std::int32_t kind = read_i32(in);
  require(kind >= 0 && kind <= 3, ErrorCode::parse, "saved model: bad architecture kind");
  arch.kind = static_cast<ArchKind>(kind);
  arch.input_dim = read_i32(in);

  const std::int32_t n_widths = read_i32(in);
  require(n_widths >= 0 && n_widths < 1024, ErrorCode::parse,
          "saved model: bad width count");
  arch.mlp_widths.assign(static_cast<std::size_t>(n_widths), 0);
  for (auto& w : arch.mlp_widths) w = read_i32(in);

  const std::int32_t n_convs = read_i32(in);
  require(n_convs >= 0 && n_convs < 1024, ErrorCode::parse, "saved model: bad conv count");
  arch.conv_channels.assign(static_cast<std::size_t>(n_convs), 0);
  for (auto& c : arch.conv_channels) c = read_i32(in);
  arch.conv_kernels.assign(static_cast<std::size_t>(n_convs), {1, 1});
  for (auto& [kh, kw] : arch.conv_kernels) {
    kh = read_i32(in);
    kw = read_i32(in);
  }
  arch.wrap_side = read_i32(in);
  arch.head_width = read_i32(in);

  const std::int32_t n_scaler = read_i32(in);
  require(in.good() && (n_scaler == 0 || n_scaler == arch.input_dim), ErrorCode::parse,
          "saved model: bad scaler length");
  SavedModel model;
  model.feat_mean.resize(n_scaler);
  model.feat_std.resize(n_scaler);
  in.read(reinterpret_cast<char*>(model.feat_mean.data()),
          static_cast<std::streamsize>(sizeof(double)) * n_scaler);
  in.read(reinterpret_cast<char*>(model.feat_std.data()),
          static_cast<std::streamsize>(sizeof(double)) * n_scaler);

  const std::int32_t n_params = read_i32(in);
  require(in.good() && n_params >= 0, ErrorCode::parse, "saved model: truncated header");
  arch.validate();
  require(layout_for(arch).total == n_params, ErrorCode::parse,
          "saved model: parameter count does not match the architecture");

  model.arch = arch;
  model.params.resize(n_params);
  in.read(reinterpret_cast<char*>(model.params.data()),
          static_cast<std::streamsize>(sizeof(double)) * n_params);
  require(in.good(), ErrorCode::parse, "saved model: truncated parameters");
  return model;
}

}  // namespace spectral
