#include "spectral/anova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>

#include "spectral/error.hpp"
#include "spectral/rng.hpp"

namespace spectral {

namespace {

double f_pvalue(double f, int df1, int df2) {
  if (!(f > 0)) return 1.0;
  const boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

double chi2_pvalue(double stat, int df) {
  if (!(stat > 0)) return 1.0;
  const boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double median_of(const Eigen::VectorXd& v) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return (n % 2 == 1) ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

FOneway f_oneway(const std::vector<Eigen::VectorXd>& groups) {
  int k = 0, n = 0;
  double grand_sum = 0;
  for (const auto& g : groups) {
    if (g.size() == 0) continue;
    ++k;
    n += static_cast<int>(g.size());
    grand_sum += g.sum();
  }
  require(k >= 2, ErrorCode::invalid_argument, "f_oneway: need at least 2 non-empty groups");
  const double grand_mean = grand_sum / n;

  double ssb = 0, ssw = 0;
  bool means_equal = true;
  double first_mean = 0;
  bool have_first = false;
  for (const auto& g : groups) {
    if (g.size() == 0) continue;
    const double mean = g.mean();
    ssb += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
    ssw += (g.array() - mean).square().sum();
    if (!have_first) {
      first_mean = mean;
      have_first = true;
    } else if (mean != first_mean) {
      means_equal = false;
    }
  }

  FOneway out;
  out.df_between = k - 1;
  out.df_within = n - k;

  // Zero within-group scatter leaves the F ratio undefined; the limit is
  // p = 1 for identical means and p = 0 for separated ones.
  const double scale = ssb + ssw;
  if (out.df_within < 1 || ssw <= scale * 1e-15) {
    if (means_equal || ssb <= scale * 1e-15) {
      out.f = 0;
      out.p = 1;
    } else {
      out.f = std::numeric_limits<double>::infinity();
      out.p = 0;
    }
    return out;
  }

  out.f = (ssb / out.df_between) / (ssw / out.df_within);
  out.p = f_pvalue(out.f, out.df_between, out.df_within);
  return out;
}

double oneway_p(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() >= 2 && b.size() >= 2, ErrorCode::invalid_argument,
          "oneway_p: need at least 2 samples per group");
  return f_oneway({a, b}).p;
}

double homogeneity_p(const std::vector<Eigen::VectorXd>& groups, HomogeneityTest test) {
  std::vector<Eigen::VectorXd> usable;
  for (const auto& g : groups) {
    if (g.size() >= 2) usable.push_back(g);
  }
  require(usable.size() >= 2, ErrorCode::invalid_argument,
          "homogeneity_p: need at least 2 groups with 2+ samples");

  if (test == HomogeneityTest::levene_median) {
    // Levene with median centering: one-way ANOVA on absolute deviations.
    std::vector<Eigen::VectorXd> z;
    z.reserve(usable.size());
    for (const auto& g : usable) {
      z.push_back((g.array() - median_of(g)).abs());
    }
    return f_oneway(z).p;
  }

  // Bartlett.
  const int k = static_cast<int>(usable.size());
  int n = 0;
  double pooled = 0;
  std::vector<double> variances;
  variances.reserve(usable.size());
  for (const auto& g : usable) {
    const int ng = static_cast<int>(g.size());
    const double mean = g.mean();
    const double var = (g.array() - mean).square().sum() / (ng - 1);
    variances.push_back(var);
    pooled += (ng - 1) * var;
    n += ng;
  }
  pooled /= (n - k);
  if (pooled <= 0) return 1.0;  // every group constant
  for (const double var : variances) {
    if (var <= 0) return 0.0;  // one group constant against non-constant others
  }

  double stat = (n - k) * std::log(pooled);
  double corr = 0;
  int i = 0;
  for (const auto& g : usable) {
    const int ng = static_cast<int>(g.size());
    stat -= (ng - 1) * std::log(variances[static_cast<std::size_t>(i++)]);
    corr += 1.0 / (ng - 1);
  }
  corr = 1.0 + (corr - 1.0 / (n - k)) / (3.0 * (k - 1));
  return chi2_pvalue(stat / corr, k - 1);
}

std::vector<char> valid_dimensions(const Eigen::MatrixXd& X,
                                   const std::vector<std::vector<int>>& groups,
                                   double alpha, HomogeneityTest test) {
  const int dim = static_cast<int>(X.cols());
  std::vector<char> valid(static_cast<std::size_t>(dim), 0);

  std::vector<const std::vector<int>*> usable;
  for (const auto& g : groups) {
    if (g.size() >= 2) usable.push_back(&g);
  }
  if (usable.size() < 2) return valid;  // nothing testable

  std::vector<Eigen::VectorXd> cols(usable.size());
  for (int d = 0; d < dim; ++d) {
    double spread = 0;
    for (std::size_t gi = 0; gi < usable.size(); ++gi) {
      const auto& idx = *usable[gi];
      Eigen::VectorXd& col = cols[gi];
      col.resize(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        col[static_cast<Eigen::Index>(i)] = X(idx[i], d);
      }
      spread += (col.array() - col.mean()).abs().sum();
    }
    if (spread <= 0) continue;  // zero spread everywhere: invalid
    valid[static_cast<std::size_t>(d)] = homogeneity_p(cols, test) > alpha ? 1 : 0;
  }
  return valid;
}

SugarGroups group_by_thresholds(const SpectraDataset& ds, double t1, double t2) {
  require(t1 < t2, ErrorCode::invalid_argument,
          "group_by_thresholds: need t1 < t2");
  SugarGroups out;
  out.t1 = t1;
  out.t2 = t2;
  out.groups.assign(3, {});
  for (int i = 0; i < ds.n(); ++i) {
    const double v = ds.sugar[i];
    const int g = (v < t1) ? 0 : (v < t2) ? 1 : 2;
    out.groups[static_cast<std::size_t>(g)].push_back(i);
  }
  static const char* names[3] = {"low", "mid", "high"};
  for (int g = 0; g < 3; ++g) {
    if (out.groups[static_cast<std::size_t>(g)].empty()) {
      out.warnings.push_back(std::string("group '") + names[g] + "' is empty");
    }
  }
  return out;
}

std::pair<double, double> tercile_thresholds(const SpectraDataset& ds) {
  std::vector<double> sorted(ds.sugar.data(), ds.sugar.data() + ds.n());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return {sorted[n / 3], sorted[(2 * n) / 3]};
}

namespace {

Eigen::VectorXd gather_column(const Eigen::MatrixXd& X, const std::vector<int>& idx, int d) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = X(idx[i], d);
  }
  return out;
}

/// Mean two-group ANOVA p over the valid dimensions, or -1 when no
/// dimension is valid.
double mean_pair_p(const Eigen::MatrixXd& X, const std::vector<int>& a,
                   const std::vector<int>& b, const std::vector<char>& valid) {
  double acc = 0;
  int count = 0;
  for (int d = 0; d < static_cast<int>(X.cols()); ++d) {
    if (!valid[static_cast<std::size_t>(d)]) continue;
    acc += oneway_p(gather_column(X, a, d), gather_column(X, b, d));
    ++count;
  }
  return count ? acc / count : -1.0;
}

}  // namespace

std::vector<PairSimilarity> between_group_similarity(
    const Eigen::MatrixXd& X, const std::vector<std::vector<int>>& groups,
    const std::vector<std::string>& labels, const AnovaOptions& options,
    std::vector<std::string>* warnings, double* mean_valid_dims) {
  require(groups.size() == labels.size(), ErrorCode::invalid_argument,
          "between_group_similarity: group/label count mismatch");
  require(options.repeats >= 1, ErrorCode::invalid_argument,
          "between_group_similarity: repeats must be positive");

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() >= 2 &&
        groups[g].size() < static_cast<std::size_t>(options.representatives)) {
      warn("group '" + labels[g] + "' has only " + std::to_string(groups[g].size()) +
           " samples; all of them are used each repeat");
    }
  }

  const std::vector<char> full_valid =
      options.valid_dims_on_full_groups
          ? valid_dimensions(X, groups, options.alpha, options.test)
          : std::vector<char>{};

  struct PairAcc {
    std::size_t a, b;
    double sum = 0;
    int count = 0;
  };
  std::vector<PairAcc> pairs;
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      if (groups[a].size() < 2 || groups[b].size() < 2) {
        warn("pair " + labels[a] + "-" + labels[b] + " skipped: a group has fewer than 2 samples");
        continue;
      }
      pairs.push_back({a, b, 0.0, 0});
    }
  }

  double valid_sum = 0;
  int valid_screens = 0;

  for (int r = 0; r < options.repeats; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    std::vector<std::vector<int>> draws(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const int size = static_cast<int>(groups[g].size());
      const int take = std::min(options.representatives, size);
      // Draw positions, then map to sample indices; smaller groups are used whole.
      for (const int pos : rng.sample_indices(size, take)) {
        draws[g].push_back(groups[g][static_cast<std::size_t>(pos)]);
      }
    }

    const std::vector<char> valid =
        options.valid_dims_on_full_groups
            ? full_valid
            : valid_dimensions(X, draws, options.alpha, options.test);
    valid_sum += std::count(valid.begin(), valid.end(), 1);
    ++valid_screens;

    for (auto& pair : pairs) {
      const double p = mean_pair_p(X, draws[pair.a], draws[pair.b], valid);
      if (p >= 0) {
        pair.sum += p;
        pair.count += 1;
      }
    }
  }

  if (mean_valid_dims) {
    *mean_valid_dims = valid_screens ? valid_sum / valid_screens : 0.0;
  }

  std::vector<PairSimilarity> out;
  for (const auto& pair : pairs) {
    PairSimilarity ps;
    ps.label = labels[pair.a] + "-" + labels[pair.b];
    if (pair.count == 0) {
      warn("pair " + ps.label + " had no valid dimensions in any repeat");
      ps.similarity_pct = 0;
    } else {
      ps.similarity_pct = 100.0 * pair.sum / pair.count;
    }
    out.push_back(std::move(ps));
  }
  return out;
}

double within_group_similarity(const Eigen::MatrixXd& X, const std::vector<int>& group,
                               const AnovaOptions& options,
                               std::vector<std::string>* warnings) {
  require(options.repeats >= 1, ErrorCode::invalid_argument,
          "within_group_similarity: repeats must be positive");
  require(options.n_subgroups >= 2, ErrorCode::invalid_argument,
          "within_group_similarity: need at least 2 subgroups");
  const int size = static_cast<int>(group.size());
  require(size >= 4, ErrorCode::invalid_argument,
          "within_group_similarity: group needs at least 4 samples");

  int n_subgroups = options.n_subgroups;
  if (size < 2 * n_subgroups) {
    n_subgroups = size / 2;
    if (warnings) {
      warnings->push_back("group of " + std::to_string(size) +
                          " is too small for " + std::to_string(options.n_subgroups) +
                          " subgroups; using " + std::to_string(n_subgroups));
    }
  }

  double acc = 0;
  int count = 0;
  for (int r = 0; r < options.repeats; ++r) {
    Rng rng(derive_seed(options.seed, 0x77697468 /* "with" */ + static_cast<std::uint64_t>(r)));
    std::vector<int> shuffled = group;
    rng.shuffle(shuffled);

    // Round-robin deal: subgroup sizes differ by at most one.
    std::vector<std::vector<int>> subs(static_cast<std::size_t>(n_subgroups));
    for (int i = 0; i < size; ++i) {
      subs[static_cast<std::size_t>(i % n_subgroups)].push_back(shuffled[static_cast<std::size_t>(i)]);
    }

    for (std::size_t a = 0; a < subs.size(); ++a) {
      for (std::size_t b = a + 1; b < subs.size(); ++b) {
        const std::vector<std::vector<int>> pair_groups = {subs[a], subs[b]};
        const std::vector<char> valid =
            valid_dimensions(X, pair_groups, options.alpha, options.test);
        const double p = mean_pair_p(X, subs[a], subs[b], valid);
        if (p >= 0) {
          acc += p;
          ++count;
        }
      }
    }
  }

  if (count == 0) {
    if (warnings) warnings->push_back("within-group comparison had no valid dimensions");
    return 0;
  }
  return 100.0 * acc / count;
}

SimilarityReport anova_report(const SpectraDataset& ds, double t1, double t2,
                              const AnovaOptions& options) {
  ds.validate();
  const SugarGroups grouping = group_by_thresholds(ds, t1, t2);

  SimilarityReport report;
  report.t1 = t1;
  report.t2 = t2;
  report.repeats = options.repeats;
  report.seed = options.seed;
  report.warnings = grouping.warnings;
  for (const auto& g : grouping.groups) {
    report.group_sizes.push_back(static_cast<int>(g.size()));
  }

  const std::vector<std::string> labels = {"low", "mid", "high"};
  report.between =
      between_group_similarity(ds.spectra, grouping.groups, labels, options,
                               &report.warnings, &report.mean_valid_dimensions);

  static const int kMinWithin = 4;
  for (std::size_t g = 0; g < grouping.groups.size(); ++g) {
    if (static_cast<int>(grouping.groups[g].size()) < kMinWithin) {
      report.warnings.push_back("group '" + labels[g] +
                                "' is too small for a within-group score");
      continue;
    }
    PairSimilarity ps;
    ps.label = labels[g];
    AnovaOptions per_group = options;
    per_group.seed = derive_seed(options.seed, 0x67727000 + g);
    ps.similarity_pct = within_group_similarity(ds.spectra, grouping.groups[g],
                                                per_group, &report.warnings);
    report.within.push_back(std::move(ps));
  }
  return report;
}

}  // namespace spectral
