#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spectral/dataset.hpp"

namespace spectral {

/// One-way ANOVA summary for k groups.
struct FOneway {
  double f = 0;
  int df_between = 0;
  int df_within = 0;
  double p = 1;
};

/// One-way ANOVA across any number of groups (each non-empty, at least two
/// groups). Degenerate inputs (zero within-group variance) give p = 1 when
/// the means agree and p = 0 when they differ.
FOneway f_oneway(const std::vector<Eigen::VectorXd>& groups);

/// Two-group convenience wrapper returning just the p-value. Equals the
/// squared pooled t-test.
double oneway_p(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

enum class HomogeneityTest {
  levene_median,  // ANOVA on |x - group median|, robust to non-normality
  bartlett,       // chi-squared statistic, assumes normality
};

/// Variance-homogeneity p-value across groups (each needs >= 2 samples).
double homogeneity_p(const std::vector<Eigen::VectorXd>& groups,
                     HomogeneityTest test = HomogeneityTest::levene_median);

/// Flags the dimensions whose groups pass the homogeneity screen
/// (p > alpha). Dimensions with zero spread in every group are invalid, as
/// are dimensions where fewer than two groups have 2+ samples.
std::vector<char> valid_dimensions(const Eigen::MatrixXd& X,
                                   const std::vector<std::vector<int>>& groups,
                                   double alpha = 0.05,
                                   HomogeneityTest test = HomogeneityTest::levene_median);

/// Sample indices split into low/mid/high sugar groups by two thresholds:
/// low = {sugar < t1}, mid = {t1 <= sugar < t2}, high = {sugar >= t2}.
/// Empty groups produce a warning entry.
struct SugarGroups {
  double t1 = 0, t2 = 0;
  std::vector<std::vector<int>> groups;  // low, mid, high
  std::vector<std::string> warnings;
};
SugarGroups group_by_thresholds(const SpectraDataset& ds, double t1, double t2);

/// Thresholds at the sugar terciles, the default grouping when none given.
std::pair<double, double> tercile_thresholds(const SpectraDataset& ds);

struct AnovaOptions {
  int repeats = 30;
  int representatives = 15;  // per-group draw size for between-group runs
  int n_subgroups = 10;      // within-group split count
  double alpha = 0.05;
  HomogeneityTest test = HomogeneityTest::levene_median;
  /// Screen dimensions once on the full groups instead of per draw.
  bool valid_dims_on_full_groups = false;
  std::uint64_t seed = 0;
};

struct PairSimilarity {
  std::string label;
  double similarity_pct = 0;  // mean ANOVA p-value over valid dims, percent
};

struct SimilarityReport {
  double t1 = 0, t2 = 0;
  std::vector<int> group_sizes;  // low, mid, high
  double mean_valid_dimensions = 0;  // mean count per screen
  std::vector<PairSimilarity> between;  // low-mid, low-high, mid-high
  std::vector<PairSimilarity> within;   // one per testable group
  int repeats = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Spectral similarity between groups: per repeat, draw `representatives`
/// samples per group without replacement (all of a smaller group, recorded),
/// screen dimensions for variance homogeneity on the drawn subsets, then
/// average the two-group ANOVA p-values over valid dimensions for every
/// group pair. Results are percents, meaned over repeats; high means the
/// groups are spectrally indistinguishable. Pairs touching a group with
/// fewer than 2 samples are skipped with a warning.
std::vector<PairSimilarity> between_group_similarity(
    const Eigen::MatrixXd& X, const std::vector<std::vector<int>>& groups,
    const std::vector<std::string>& labels, const AnovaOptions& options,
    std::vector<std::string>* warnings = nullptr,
    double* mean_valid_dims = nullptr);

/// Internal consistency of one group: per repeat, shuffle and split into
/// n_subgroups near-equal parts, then average pairwise two-group ANOVA
/// p-values over each pair's valid dimensions, across all pairs and repeats
/// (percent). Too-small groups reduce the subgroup count with a warning.
double within_group_similarity(const Eigen::MatrixXd& X, const std::vector<int>& group,
                               const AnovaOptions& options,
                               std::vector<std::string>* warnings = nullptr);

/// Full dataset-validation report over the three threshold groups.
SimilarityReport anova_report(const SpectraDataset& ds, double t1, double t2,
                              const AnovaOptions& options);

}  // namespace spectral
