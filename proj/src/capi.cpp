#include "spectral/spectral.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "spectral/anova.hpp"
#include "spectral/dataset.hpp"
#include "spectral/error.hpp"
#include "spectral/harness.hpp"
#include "spectral/nn.hpp"
#include "spectral/report.hpp"

namespace {

thread_local std::string g_last_error;

spectral_status map_code(spectral::ErrorCode code) {
  switch (code) {
    case spectral::ErrorCode::invalid_argument: return SPECTRAL_ERR_INVALID_ARGUMENT;
    case spectral::ErrorCode::parse: return SPECTRAL_ERR_PARSE;
    case spectral::ErrorCode::io: return SPECTRAL_ERR_IO;
    case spectral::ErrorCode::numeric: return SPECTRAL_ERR_NUMERIC;
  }
  return SPECTRAL_ERR_INTERNAL;
}

template <class Fn>
spectral_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return SPECTRAL_OK;
  } catch (const spectral::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPECTRAL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SPECTRAL_ERR_INTERNAL;
  }
}

const spectral::SpectraDataset& unwrap(const spectral_dataset* ds) {
  spectral::require(ds != nullptr, spectral::ErrorCode::invalid_argument,
                    "null dataset handle");
  return *reinterpret_cast<const spectral::SpectraDataset*>(ds);
}

char* duplicate(const std::string& text) {
  char* block = static_cast<char*>(std::malloc(text.size() + 1));
  spectral::require(block != nullptr, spectral::ErrorCode::io, "out of memory");
  std::memcpy(block, text.c_str(), text.size() + 1);
  return block;
}

void store_text(char** out_text, const std::string& text) {
  spectral::require(out_text != nullptr, spectral::ErrorCode::invalid_argument,
                    "null output pointer");
  *out_text = duplicate(text);
}

spectral::CvOptions to_cv_options(const spectral_run_options* options) {
  spectral::require(options != nullptr, spectral::ErrorCode::invalid_argument,
                    "null run options");
  spectral::CvOptions cv;
  cv.folds = options->folds;
  cv.seed = options->seed;
  cv.pls_max_components = options->pls_max_components;
  cv.pls_inner_folds = options->pls_inner_folds;
  cv.segpls_components = options->segpls_components;
  cv.ga.population = options->ga_population;
  cv.ga.generations = options->ga_generations;
  cv.ga.inner_cv_folds = options->ga_inner_folds;
  cv.ga.pls_components = options->ga_pls_components;
  cv.ga.elitism = options->ga_elitism != 0;
  cv.nn.epochs = options->nn_epochs;
  cv.nn.learning_rate = options->nn_learning_rate;
  cv.nn.optimizer = options->nn_adam != 0 ? spectral::Optimizer::adam
                                          : spectral::Optimizer::gradient_descent;
  cv.nn.seed = options->seed;
  cv.nn_reduced = options->nn_reduced != 0;
  if (options->nn_mlp_widths != nullptr && options->nn_mlp_width_count > 0)
    cv.nn_mlp_widths.assign(options->nn_mlp_widths,
                            options->nn_mlp_widths + options->nn_mlp_width_count);
  if (options->nn_conv_channels != nullptr && options->nn_conv_channel_count > 0)
    cv.nn_conv_channels.assign(options->nn_conv_channels,
                               options->nn_conv_channels + options->nn_conv_channel_count);
  cv.nn_head_width = options->nn_head_width;
  return cv;
}

spectral::SynthConfig profile_config(const char* profile, int n_samples,
                                     std::uint64_t seed) {
  spectral::require(profile != nullptr, spectral::ErrorCode::invalid_argument,
                    "null profile name");
  const std::string name(profile);
  if (name == "pear") return spectral::pear_profile(n_samples, seed);
  if (name == "navel") return spectral::navel_profile(n_samples, seed);
  spectral::fail(spectral::ErrorCode::invalid_argument,
                 "unknown profile '" + name + "' (expected pear or navel)");
}

}  // namespace

extern "C" {

const char* spectral_last_error(void) { return g_last_error.c_str(); }

void spectral_string_free(char* text) { std::free(text); }

spectral_status spectral_dataset_load_csv(const char* path, spectral_dataset** out) {
  return guarded([&] {
    spectral::require(path != nullptr && out != nullptr,
                      spectral::ErrorCode::invalid_argument, "null argument");
    auto ds = new spectral::SpectraDataset(spectral::load_csv(path));
    *out = reinterpret_cast<spectral_dataset*>(ds);
  });
}

spectral_status spectral_dataset_save_csv(const spectral_dataset* ds, const char* path) {
  return guarded([&] {
    spectral::require(path != nullptr, spectral::ErrorCode::invalid_argument, "null path");
    spectral::save_csv(unwrap(ds), path);
  });
}

spectral_status spectral_dataset_synthesize(const char* profile, int n_samples,
                                            uint64_t seed, spectral_dataset** out) {
  return guarded([&] {
    spectral::require(out != nullptr, spectral::ErrorCode::invalid_argument,
                      "null output pointer");
    auto config = profile_config(profile, n_samples, seed);
    auto ds = new spectral::SpectraDataset(spectral::synthesize(config));
    *out = reinterpret_cast<spectral_dataset*>(ds);
  });
}

void spectral_dataset_free(spectral_dataset* ds) {
  delete reinterpret_cast<spectral::SpectraDataset*>(ds);
}

int spectral_dataset_samples(const spectral_dataset* ds) {
  if (ds == nullptr) return 0;
  return static_cast<int>(unwrap(ds).spectra.rows());
}

int spectral_dataset_dim(const spectral_dataset* ds) {
  if (ds == nullptr) return 0;
  return static_cast<int>(unwrap(ds).spectra.cols());
}

spectral_status spectral_dataset_stats_text(const spectral_dataset* ds, char** out_text) {
  return guarded([&] {
    const auto& data = unwrap(ds);
    const auto stats = spectral::dataset_stats(data);
    store_text(out_text, spectral::stats_text(stats, static_cast<int>(data.spectra.rows()),
                                              static_cast<int>(data.spectra.cols())));
  });
}

void spectral_run_options_init(spectral_run_options* options) {
  if (options == nullptr) return;
  const spectral::CvOptions cv;
  options->folds = cv.folds;
  options->seed = cv.seed;
  options->pls_max_components = cv.pls_max_components;
  options->pls_inner_folds = cv.pls_inner_folds;
  options->segpls_components = cv.segpls_components;
  options->ga_population = cv.ga.population;
  options->ga_generations = cv.ga.generations;
  options->ga_inner_folds = cv.ga.inner_cv_folds;
  options->ga_pls_components = cv.ga.pls_components;
  options->ga_elitism = cv.ga.elitism ? 1 : 0;
  options->nn_epochs = cv.nn.epochs;
  options->nn_learning_rate = cv.nn.learning_rate;
  options->nn_adam = cv.nn.optimizer == spectral::Optimizer::adam ? 1 : 0;
  options->nn_reduced = cv.nn_reduced ? 1 : 0;
  options->nn_mlp_widths = nullptr;
  options->nn_mlp_width_count = 0;
  options->nn_conv_channels = nullptr;
  options->nn_conv_channel_count = 0;
  options->nn_head_width = cv.nn_head_width;
}

spectral_status spectral_run_strategy(const spectral_dataset* ds, const char* strategy,
                                      const spectral_run_options* options,
                                      int as_table, char** out_text) {
  return guarded([&] {
    spectral::require(strategy != nullptr, spectral::ErrorCode::invalid_argument,
                      "null strategy");
    const auto report =
        spectral::cross_validate(unwrap(ds), std::string(strategy), to_cv_options(options));
    store_text(out_text, as_table != 0 ? spectral::report_table(report)
                                       : spectral::report_to_json(report));
  });
}

spectral_status spectral_compare_strategies(const spectral_dataset* ds,
                                            const char* const* strategies, int count,
                                            const spectral_run_options* options,
                                            int as_table, char** out_text) {
  return guarded([&] {
    spectral::require(strategies != nullptr && count > 0,
                      spectral::ErrorCode::invalid_argument,
                      "need at least one strategy");
    std::vector<std::string> list;
    list.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      spectral::require(strategies[i] != nullptr, spectral::ErrorCode::invalid_argument,
                        "null strategy");
      list.emplace_back(strategies[i]);
    }
    std::vector<std::string> row_errors;
    const auto reports =
        spectral::compare_strategies(unwrap(ds), list, to_cv_options(options), &row_errors);
    store_text(out_text, as_table != 0 ? spectral::compare_table(reports, row_errors)
                                       : spectral::compare_to_json(reports, row_errors));
  });
}

void spectral_anova_options_init(spectral_anova_options* options) {
  if (options == nullptr) return;
  const spectral::AnovaOptions ao;
  options->use_terciles = 1;
  options->t1 = 0;
  options->t2 = 0;
  options->repeats = ao.repeats;
  options->representatives = ao.representatives;
  options->n_subgroups = ao.n_subgroups;
  options->alpha = ao.alpha;
  options->bartlett = 0;
  options->valid_dims_on_full_groups = ao.valid_dims_on_full_groups ? 1 : 0;
  options->seed = ao.seed;
}

spectral_status spectral_anova(const spectral_dataset* ds,
                               const spectral_anova_options* options,
                               int as_table, char** out_text) {
  return guarded([&] {
    spectral::require(options != nullptr, spectral::ErrorCode::invalid_argument,
                      "null anova options");
    const auto& data = unwrap(ds);
    spectral::AnovaOptions ao;
    ao.repeats = options->repeats;
    ao.representatives = options->representatives;
    ao.n_subgroups = options->n_subgroups;
    ao.alpha = options->alpha;
    ao.test = options->bartlett != 0 ? spectral::HomogeneityTest::bartlett
                                     : spectral::HomogeneityTest::levene_median;
    ao.valid_dims_on_full_groups = options->valid_dims_on_full_groups != 0;
    ao.seed = options->seed;
    double t1 = options->t1;
    double t2 = options->t2;
    if (options->use_terciles != 0) std::tie(t1, t2) = spectral::tercile_thresholds(data);
    const auto report = spectral::anova_report(data, t1, t2, ao);
    store_text(out_text, as_table != 0 ? spectral::anova_table(report)
                                       : spectral::anova_to_json(report));
  });
}

spectral_status spectral_train_model(const spectral_dataset* ds, const char* strategy,
                                     const spectral_run_options* options,
                                     const char* path) {
  return guarded([&] {
    spectral::require(strategy != nullptr && path != nullptr,
                      spectral::ErrorCode::invalid_argument, "null argument");
    const auto parsed = spectral::parse_strategy(strategy);
    spectral::train_and_save_model(unwrap(ds), parsed, to_cv_options(options), path);
  });
}

spectral_status spectral_predict_csv(const char* model_path, const spectral_dataset* ds,
                                     char** out_text) {
  return guarded([&] {
    spectral::require(model_path != nullptr, spectral::ErrorCode::invalid_argument,
                      "null model path");
    const auto& data = unwrap(ds);
    const auto model = spectral::load_model(model_path);
    spectral::require(
        static_cast<int>(data.spectra.cols()) == model.arch.input_dim,
        spectral::ErrorCode::invalid_argument,
        "data dimension " + std::to_string(data.spectra.cols()) +
            " does not match model input " + std::to_string(model.arch.input_dim));
    Eigen::MatrixXd features = data.spectra;
    if (model.feat_mean.size() > 0) {
      features = (features.rowwise() - model.feat_mean.transpose()).array().rowwise() /
                 model.feat_std.transpose().array();
    }
    const Eigen::VectorXd pred = spectral::nn_predict(model.arch, model.params, features);
    std::string csv = "id,prediction\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6f", pred[i]);
      csv += data.ids[static_cast<std::size_t>(i)];
      csv += ',';
      csv += buf;
      csv += '\n';
    }
    store_text(out_text, csv);
  });
}

}  // extern "C"
