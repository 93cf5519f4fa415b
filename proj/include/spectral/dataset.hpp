#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace spectral {

/// A set of spectra with reference sugar content.
/// `spectra` holds one sample per row; `sugar` is in degrees Brix.
struct SpectraDataset {
  std::vector<std::string> ids;
  Eigen::MatrixXd spectra;  // n x dim
  Eigen::VectorXd sugar;    // n, strictly positive

  int n() const { return static_cast<int>(spectra.rows()); }
  int dim() const { return static_cast<int>(spectra.cols()); }

  /// Throws on inconsistent sizes, non-finite values, or non-positive sugar.
  void validate() const;
};

enum class StdForm { population, sample };

struct DatasetStats {
  double mean = 0;
  double std_dev = 0;
  double min = 0;
  double max = 0;
  int distinct = 0;  // exact-equality distinct sugar values
};

/// One Gaussian absorption band of the synthetic generator.
struct SynthPeak {
  double center = 0;     // index units, may lie outside [0, dim)
  double width = 1;      // Gaussian sigma in index units, > 0
  double amplitude = 0;  // band strength per unit sugar
};

/// Parameters of the synthetic spectrum generator. Each sample i draws
///   sugar_i ~ N(sugar_mean, sugar_std), clamped to be positive,
///   m_i ~ N(1, scatter_std), b_i ~ N(0, offset_std), c_ik ~ N(0, 1),
/// and gets the spectrum
///   m_i * (baseline(t) + sugar_i * bands(t) + sum_k c_ik * interferent_k(t))
///     + b_i + noise,
/// where every band is a Gaussian. The multiplicative/additive pair is
/// exactly the distortion that reference or standardisation corrections
/// remove; their stddevs default to zero. Interferent bands model absorbers
/// (water, cellulose, acids) whose concentrations vary from fruit to fruit
/// independently of sugar and of one another, one latent c_ik per band: for
/// them `amplitude` is the full standard deviation of the band's
/// contribution, since each c_ik has unit spread.
struct SynthConfig {
  int n_samples = 300;
  int dim = 1600;
  double sugar_mean = 12.0;
  double sugar_std = 1.0;
  std::vector<SynthPeak> peaks;
  std::vector<SynthPeak> interferents;
  double baseline_amplitude = 0.5;
  double scatter_std = 0.0;
  double offset_std = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  /// When >= 0, sugar labels are rounded to this many decimals, mimicking
  /// instrument readouts with limited resolution (-1 keeps raw draws).
  int label_decimals = -1;

  void validate() const;
};

/// Disjoint k-fold partition of [0, n). Validation folds cover every index
/// exactly once; fold sizes differ by at most one.
struct FoldSplit {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> validation;  // k folds, ascending indices
  std::vector<std::vector<int>> train;       // complements, ascending
};

SpectraDataset load_csv(const std::string& path);
void save_csv(const SpectraDataset& ds, const std::string& path);

SpectraDataset synthesize(const SynthConfig& config);

/// Named generator profiles with band layout and label statistics matching
/// the two fruit datasets the workbench is calibrated against.
SynthConfig pear_profile(int n_samples = 300, std::uint64_t seed = 0);
SynthConfig navel_profile(int n_samples = 300, std::uint64_t seed = 0);

FoldSplit kfold_split(int n, int k, std::uint64_t seed);

DatasetStats dataset_stats(const SpectraDataset& ds,
                           StdForm form = StdForm::population);

}  // namespace spectral
