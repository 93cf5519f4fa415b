#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spectral {

enum class ArchKind { mlp, cnn, mlp_cnn, cnn_mlp };

/// Network shape description. All four architectures regress a scalar:
///
///   mlp      dense stack (widths, ReLU between) -> dense to 1
///   mlp_cnn  dense stack -> self-correlation map (outer product of the last
///            hidden vector with itself) -> conv stack (ReLU between) -> one
///            full-extent conv collapsing the map to the scalar
///   cnn      input wrapped to a square map -> conv stack -> full-extent conv
///   cnn_mlp  wrapped input -> conv stack -> flatten -> dense head -> 1
///
/// Convolutions use same-size zero padding and odd kernels.
struct ModelArch {
  ArchKind kind = ArchKind::mlp;
  int input_dim = 0;
  std::vector<int> mlp_widths = {512, 256, 128, 64, 32, 16};
  std::vector<int> conv_channels = {64, 64, 128, 128};
  std::vector<std::pair<int, int>> conv_kernels = {{3, 1}, {1, 3}, {3, 1}, {1, 3}};
  int wrap_side = 0;    // cnn / cnn_mlp: wrap_side^2 == input_dim
  int head_width = 16;  // cnn_mlp dense head

  void validate() const;

  /// Published layer sizes. For cnn/cnn_mlp the input must be a perfect
  /// square; wrap_side is derived.
  static ModelArch standard(ArchKind kind, int input_dim);
  /// Down-scaled sizes for fast tests and gradient checks.
  static ModelArch reduced(ArchKind kind, int input_dim);
};

/// One named parameter block inside the flat vector (row-major layout).
struct ParamBlock {
  std::string name;
  std::vector<int> dims;
  int offset = 0;
  int size = 0;
};

struct ParamLayout {
  std::vector<ParamBlock> blocks;
  int total = 0;
};

ParamLayout layout_for(const ModelArch& arch);

/// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
Eigen::VectorXd glorot_init(const ModelArch& arch, std::uint64_t seed);

/// Forward pass; X holds one sample per row, X.cols() == arch.input_dim.
Eigen::VectorXd nn_predict(const ModelArch& arch, const Eigen::VectorXd& params,
                           const Eigen::MatrixXd& X);

/// Mean squared error of the forward pass against y.
double nn_loss(const ModelArch& arch, const Eigen::VectorXd& params,
               const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct LossGrad {
  double mse = 0;
  Eigen::VectorXd grad;  // d mse / d params, same layout as params
};

/// Reverse-mode gradient of the mean squared error.
LossGrad nn_loss_and_grad(const ModelArch& arch, const Eigen::VectorXd& params,
                          const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

enum class Optimizer { gradient_descent, adam };

struct TrainConfig {
  int epochs = 5000;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::gradient_descent;
  std::uint64_t seed = 0;  // initialization seed; training itself is deterministic
};

struct TrainResult {
  Eigen::VectorXd params;
  /// Root of the training MSE: one entry per epoch evaluated before that
  /// epoch's update, plus a final entry for the returned parameters, so
  /// loss_trace.size() == epochs + 1 and loss_trace.back() is the trained
  /// model's training RMSE.
  std::vector<double> loss_trace;
};

/// Full-batch training. Throws a numeric error naming the epoch and the last
/// finite loss if the loss leaves the finite range.
TrainResult nn_train(const ModelArch& arch, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, const TrainConfig& config);

/// Outer product v * v^T, the map connecting the dense stack to the conv
/// stack in mlp_cnn. Symmetric, rank <= 1.
Eigen::MatrixXd self_correlation(const Eigen::VectorXd& v);

/// Networks train on per-dimension standardized features; the scaler fitted on
/// the training rows travels with the weights so prediction can reapply it.
/// Empty mean/std vectors mean no scaling.
struct SavedModel {
  ModelArch arch;
  Eigen::VectorXd params;
  Eigen::VectorXd feat_mean;
  Eigen::VectorXd feat_std;
};

void save_model(const ModelArch& arch, const Eigen::VectorXd& params,
                const std::string& path);
void save_model(const ModelArch& arch, const Eigen::VectorXd& params,
                const std::string& path, const Eigen::VectorXd& feat_mean,
                const Eigen::VectorXd& feat_std);
SavedModel load_model(const std::string& path);

}  // namespace spectral
