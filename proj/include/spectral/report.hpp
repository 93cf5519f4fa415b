#pragma once

#include <string>
#include <vector>

#include "spectral/anova.hpp"
#include "spectral/dataset.hpp"
#include "spectral/harness.hpp"

namespace spectral {

/// JSON renderings. Key order is fixed and floats use shortest round-trip
/// form, so identical inputs give byte-identical output.
std::string report_to_json(const EvalReport& report);
std::string compare_to_json(const std::vector<EvalReport>& reports,
                            const std::vector<std::string>& row_errors);
std::string anova_to_json(const SimilarityReport& report);

/// Plain-text renderings (aligned columns, 3-decimal numerics).
std::string report_table(const EvalReport& report);
std::string compare_table(const std::vector<EvalReport>& reports,
                          const std::vector<std::string>& row_errors);
std::string anova_table(const SimilarityReport& report);
std::string stats_text(const DatasetStats& stats, int n_samples, int dim);

}  // namespace spectral
