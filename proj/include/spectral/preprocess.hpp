#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectral/ga.hpp"

namespace spectral {

enum class StepKind { sg, msc, snv, d1, d2, pca, wd, ga };

/// One preprocessing step of a strategy chain. `arg` is the integer
/// parameter of the parameterized steps: PCA component count, WD target
/// dimension, GA selected-feature count.
struct PreprocessStep {
  StepKind kind = StepKind::sg;
  int arg = 0;
  int sg_window = 5;
  int sg_polyorder = 2;
};

enum class ModelKind { pls, segpls, mlp, cnn, cnn_mlp, mlp_cnn };

/// A parsed strategy: preprocessing steps in application order plus the
/// terminal model. `text` is the canonical rendering, e.g.
/// "SG>MSC>SNV>WD(400)>GA(100)>PLS" or "Non>PLS" for an empty chain.
struct Strategy {
  std::vector<PreprocessStep> steps;
  ModelKind model = ModelKind::pls;
  int model_arg = 0;  // SEGPLS segment length

  std::string text;
};

/// Grammar: ("Non" | step (">" step)*) ">" model
///   step  := SG | MSC | SNV | D1 | D2 | PCA(int) | WD(int) | GA(int)
///   model := PLS | SEGPLS(int) | MLP | CNN | CNN-MLP | MLP-CNN
/// Case-sensitive; whitespace around tokens is ignored. Errors carry the
/// offending token.
Strategy parse_strategy(const std::string& text);
std::string render_strategy(const Strategy& strategy);

/// Savitzky-Golay smoothing: least-squares polynomial fit over a sliding
/// window, evaluated at the window center. Coefficients come from solving
/// the fitting system, not from tables. Near the edges, where no full
/// window fits, the first (last) full window's polynomial is evaluated at
/// the off-center positions, which keeps polynomials of degree <= polyorder
/// exact everywhere.
Eigen::VectorXd sg_smooth(const Eigen::VectorXd& x, int window = 5, int polyorder = 2);

/// Standard normal variate: center and scale one spectrum to mean 0,
/// population std 1.
Eigen::VectorXd snv(const Eigen::VectorXd& x);

/// Central-difference derivative, one-sided at the ends. order 2 applies the
/// stencil twice.
Eigen::VectorXd derivative(const Eigen::VectorXd& x, int order);

/// One orthonormal Haar stage: pairwise (sum, difference) / sqrt(2).
/// Requires even length. Energy is preserved across (approx, detail).
std::pair<Eigen::VectorXd, Eigen::VectorXd> haar_stage(const Eigen::VectorXd& x);

/// Repeated Haar approximation until the length reaches target_dim, which
/// must be the input length divided by a power of two.
Eigen::VectorXd wavelet_decompose(const Eigen::VectorXd& x, int target_dim);

/// Multiplicative scatter correction. The reference is the training mean
/// spectrum; apply regresses a spectrum on the reference (x ~ a + b*ref) and
/// returns (x - a) / b.
Eigen::VectorXd msc_reference(const Eigen::MatrixXd& train);
Eigen::VectorXd msc_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& reference);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // dim x k, orthonormal columns
};

/// PCA by thin SVD of the centered training block. Component signs are fixed
/// (largest-magnitude loading positive) so results do not depend on the SVD
/// implementation's sign conventions. k must be <= min(n - 1, dim).
PcaModel pca_fit(const Eigen::MatrixXd& train, int k);
Eigen::MatrixXd pca_apply(const PcaModel& model, const Eigen::MatrixXd& X);

/// A fitted chain step: the step descriptor plus whatever state fitting
/// produced (MSC reference, PCA basis, GA mask).
struct FittedStep {
  PreprocessStep step;
  Eigen::VectorXd msc_ref;
  PcaModel pca;
  std::vector<int> ga_mask;
  std::optional<GaResult> ga_result;  // kept for reporting
};

struct FittedChain {
  std::vector<FittedStep> steps;

  /// Transforms a block of spectra (rows) through every fitted step.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

struct ChainFitOptions {
  GaConfig ga;  // k_select is overridden by the GA step's argument
};

/// Fits the chain's data-dependent steps on the training block only (GA also
/// sees the training labels), then transforms both blocks. Step errors are
/// annotated with the 1-based step position.
struct ChainResult {
  FittedChain chain;
  Eigen::MatrixXd train;
  Eigen::MatrixXd applied;
};
ChainResult chain_fit_apply(const std::vector<PreprocessStep>& steps,
                            const Eigen::MatrixXd& train_x,
                            const Eigen::VectorXd& train_y,
                            const Eigen::MatrixXd& apply_x,
                            const ChainFitOptions& options);

}  // namespace spectral
