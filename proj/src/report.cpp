#include "spectral/report.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

namespace spectral {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json report_json_object(const EvalReport& report) {
  ordered_json j;
  j["strategy"] = report.strategy;
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["per_fold_rmse"] = report.per_fold_rmse;
  j["rmsecv"] = report.rmsecv;
  j["r2_mean"] = report.r2_mean;
  j["std"] = report.std_dev;
  j["closeness_pct"] = report.closeness_pct;
  if (!report.ga_trace.empty()) {
    ordered_json trace = ordered_json::array();
    for (const auto& fold : report.ga_trace) {
      ordered_json t;
      t["fold"] = fold.fold;
      t["best_rmsecv"] = fold.best_rmsecv;
      t["best_mask"] = fold.best_mask;
      trace.push_back(std::move(t));
    }
    j["ga_trace"] = std::move(trace);
  }
  if (!report.nn_loss_trace.empty()) {
    j["nn_loss_trace"] = report.nn_loss_trace;
  }
  return j;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

/// Aligned two-or-more column table. Column 0 is left-aligned, the rest
/// right-aligned.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      const std::size_t pad = width[c] - row[c].size();
      if (c == 0) {
        out += row[c];
        if (c + 1 < row.size()) out.append(pad, ' ');
      } else {
        out.append(pad, ' ');
        out += row[c];
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  return report_json_object(report).dump(2) + "\n";
}

std::string compare_to_json(const std::vector<EvalReport>& reports,
                            const std::vector<std::string>& row_errors) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const bool failed = i < row_errors.size() && !row_errors[i].empty();
    if (failed) {
      ordered_json j;
      j["strategy"] = reports[i].strategy;
      j["error"] = row_errors[i];
      arr.push_back(std::move(j));
    } else {
      arr.push_back(report_json_object(reports[i]));
    }
  }
  return arr.dump(2) + "\n";
}

std::string anova_to_json(const SimilarityReport& report) {
  ordered_json j;
  j["t1"] = report.t1;
  j["t2"] = report.t2;
  j["group_sizes"] = report.group_sizes;
  j["mean_valid_dimensions"] = report.mean_valid_dimensions;
  ordered_json between = ordered_json::array();
  for (const auto& pair : report.between) {
    ordered_json p;
    p["pair"] = pair.label;
    p["similarity_pct"] = pair.similarity_pct;
    between.push_back(std::move(p));
  }
  j["between"] = std::move(between);
  ordered_json within = ordered_json::array();
  for (const auto& group : report.within) {
    ordered_json p;
    p["group"] = group.label;
    p["similarity_pct"] = group.similarity_pct;
    within.push_back(std::move(p));
  }
  j["within"] = std::move(within);
  j["repeats"] = report.repeats;
  j["seed"] = report.seed;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"strategy", report.strategy});
  rows.push_back({"folds", std::to_string(report.folds)});
  rows.push_back({"seed", std::to_string(report.seed)});
  rows.push_back({"rmsecv", fixed3(report.rmsecv)});
  rows.push_back({"r2_mean", fixed3(report.r2_mean)});
  rows.push_back({"std", fixed3(report.std_dev)});
  rows.push_back({"closeness", fixed1(report.closeness_pct) + "%"});
  std::string folds;
  for (std::size_t f = 0; f < report.per_fold_rmse.size(); ++f) {
    if (f) folds += ' ';
    folds += fixed3(report.per_fold_rmse[f]);
  }
  rows.push_back({"per_fold_rmse", folds});
  return render_table(rows);
}

std::string compare_table(const std::vector<EvalReport>& reports,
                          const std::vector<std::string>& row_errors) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"strategy", "rmsecv", "r2", "closeness"});
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const bool failed = i < row_errors.size() && !row_errors[i].empty();
    if (failed) {
      rows.push_back({reports[i].strategy, "error: " + row_errors[i], "", ""});
    } else {
      rows.push_back({reports[i].strategy, fixed3(reports[i].rmsecv),
                      fixed3(reports[i].r2_mean),
                      fixed1(reports[i].closeness_pct) + "%"});
    }
  }
  return render_table(rows);
}

std::string anova_table(const SimilarityReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"thresholds", fixed3(report.t1) + " / " + fixed3(report.t2)});
  std::string sizes;
  for (std::size_t g = 0; g < report.group_sizes.size(); ++g) {
    if (g) sizes += " / ";
    sizes += std::to_string(report.group_sizes[g]);
  }
  rows.push_back({"group_sizes", sizes});
  rows.push_back({"mean_valid_dims", fixed1(report.mean_valid_dimensions)});
  for (const auto& pair : report.between) {
    rows.push_back({"between " + pair.label, fixed1(pair.similarity_pct) + "%"});
  }
  for (const auto& group : report.within) {
    rows.push_back({"within " + group.label, fixed1(group.similarity_pct) + "%"});
  }
  rows.push_back({"repeats", std::to_string(report.repeats)});
  rows.push_back({"seed", std::to_string(report.seed)});
  std::string out = render_table(rows);
  for (const auto& warning : report.warnings) {
    out += "warning: " + warning + "\n";
  }
  return out;
}

std::string stats_text(const DatasetStats& stats, int n_samples, int dim) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"samples", std::to_string(n_samples)});
  rows.push_back({"dim", std::to_string(dim)});
  rows.push_back({"sugar_mean", fixed3(stats.mean)});
  rows.push_back({"sugar_std", fixed3(stats.std_dev)});
  rows.push_back({"sugar_min", fixed3(stats.min)});
  rows.push_back({"sugar_max", fixed3(stats.max)});
  rows.push_back({"distinct_values", std::to_string(stats.distinct)});
  return render_table(rows);
}

}  // namespace spectral
