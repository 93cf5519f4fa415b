// Command-line front end. Talks to the library exclusively through the C
// interface in spectral/spectral.h, so it doubles as a smoke test of that
// boundary. Exit codes: 0 success, 2 bad usage or bad input values, 1 for
// runtime failures (io, numerics, internal).
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spectral/spectral.h"

namespace {

struct DatasetDeleter {
  void operator()(spectral_dataset* ds) const { spectral_dataset_free(ds); }
};
using DatasetPtr = std::unique_ptr<spectral_dataset, DatasetDeleter>;

struct TextDeleter {
  void operator()(char* text) const { spectral_string_free(text); }
};
using TextPtr = std::unique_ptr<char, TextDeleter>;

int exit_code_for(spectral_status status) {
  switch (status) {
    case SPECTRAL_OK: return 0;
    case SPECTRAL_ERR_INVALID_ARGUMENT:
    case SPECTRAL_ERR_PARSE: return 2;
    default: return 1;
  }
}

[[noreturn]] void bail(spectral_status status) {
  std::cerr << "error: " << spectral_last_error() << "\n";
  std::exit(exit_code_for(status));
}

void check(spectral_status status) {
  if (status != SPECTRAL_OK) bail(status);
}

DatasetPtr load_dataset(const std::string& path) {
  spectral_dataset* raw = nullptr;
  check(spectral_dataset_load_csv(path.c_str(), &raw));
  return DatasetPtr(raw);
}

// Writes to the --out file when given, else to stdout.
void emit(const std::string& out_path, const char* text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open '" << out_path << "' for writing\n";
    std::exit(1);
  }
  out << text;
  if (!out.good()) {
    std::cerr << "error: write to '" << out_path << "' failed\n";
    std::exit(1);
  }
}

// Options shared by `run` and `compare`.
struct RunFlags {
  spectral_run_options options;
  std::vector<int> mlp_widths;
  std::vector<int> conv_channels;
  bool adam = false;
  bool no_elitism = false;
  bool nn_reduced = false;
  std::string format = "json";

  RunFlags() { spectral_run_options_init(&options); }

  void attach(CLI::App& cmd) {
    cmd.add_option("--folds", options.folds, "Cross-validation folds");
    cmd.add_option("--seed", options.seed, "Master random seed");
    cmd.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "table"}));
    cmd.add_option("--pls-max-components", options.pls_max_components,
                   "Upper bound for the inner component search");
    cmd.add_option("--pls-inner-folds", options.pls_inner_folds,
                   "Inner folds of the component search");
    cmd.add_option("--segpls-components", options.segpls_components,
                   "Fixed component count of segmented runs");
    cmd.add_option("--ga-population", options.ga_population, "GA population size");
    cmd.add_option("--ga-generations", options.ga_generations, "GA generations");
    cmd.add_option("--ga-inner-folds", options.ga_inner_folds,
                   "Folds of the GA fitness cross-validation");
    cmd.add_option("--ga-pls-components", options.ga_pls_components,
                   "Fixed depth of the GA fitness model");
    cmd.add_flag("--ga-pure-replacement", no_elitism,
                 "Replace the whole generation (no elitism)");
    cmd.add_option("--nn-epochs", options.nn_epochs, "Training epochs");
    cmd.add_option("--nn-lr", options.nn_learning_rate, "Learning rate");
    cmd.add_flag("--nn-adam", adam, "Train with Adam instead of plain gradient descent");
    cmd.add_flag("--nn-reduced", nn_reduced, "Down-scaled network sizes for quick runs");
    cmd.add_option("--nn-mlp-widths", mlp_widths,
                   "Dense trunk widths, e.g. --nn-mlp-widths 64 32 16")
        ->expected(-1);
    cmd.add_option("--nn-conv-channels", conv_channels,
                   "Channels of the four conv layers")
        ->expected(4);
    cmd.add_option("--nn-head-width", options.nn_head_width, "Width of the dense head");
  }

  const spectral_run_options* finish() {
    options.ga_elitism = no_elitism ? 0 : 1;
    options.nn_adam = adam ? 1 : 0;
    options.nn_reduced = nn_reduced ? 1 : 0;
    if (!mlp_widths.empty()) {
      options.nn_mlp_widths = mlp_widths.data();
      options.nn_mlp_width_count = static_cast<int>(mlp_widths.size());
    }
    if (!conv_channels.empty()) {
      options.nn_conv_channels = conv_channels.data();
      options.nn_conv_channel_count = static_cast<int>(conv_channels.size());
    }
    return &options;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectroscopy regression workbench"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate a synthetic spectra dataset");
  std::string synth_profile = "pear";
  int synth_n = 300;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--profile", synth_profile, "Fruit profile")
      ->check(CLI::IsMember({"pear", "navel"}));
  synth->add_option("--n", synth_n, "Sample count");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output CSV path")->required();

  // ---- run ----
  auto* run = app.add_subcommand("run", "Cross-validate one strategy");
  std::string run_data, run_strategy, run_out, run_save_model;
  RunFlags run_flags;
  run->add_option("--data", run_data, "Dataset CSV")->required();
  run->add_option("--strategy", run_strategy,
                  "Strategy text, e.g. \"SG>MSC>SNV>WD(400)>GA(100)>PLS\"")
      ->required();
  run->add_option("--out", run_out, "Write the report here instead of stdout");
  run->add_option("--save-model", run_save_model,
                  "Also train on the full dataset and save the network here "
                  "(neural strategies only)");
  run_flags.attach(*run);

  // ---- compare ----
  auto* compare = app.add_subcommand("compare", "Evaluate several strategies on one split");
  std::string compare_data, compare_out;
  std::vector<std::string> compare_strategies;
  RunFlags compare_flags;
  compare->add_option("--data", compare_data, "Dataset CSV")->required();
  compare->add_option("--strategy", compare_strategies, "Strategy text (repeatable)")
      ->required()
      ->take_all();
  compare->add_option("--out", compare_out, "Write the report here instead of stdout");
  compare_flags.attach(*compare);

  // ---- anova ----
  auto* anova = app.add_subcommand("anova", "Group the dataset by sugar and test similarity");
  std::string anova_data, anova_out, anova_format = "json";
  spectral_anova_options anova_options;
  spectral_anova_options_init(&anova_options);
  bool anova_bartlett = false, anova_full_groups = false;
  auto* t1_opt = anova->add_option("--t1", anova_options.t1, "Low/mid sugar threshold");
  auto* t2_opt = anova->add_option("--t2", anova_options.t2, "Mid/high sugar threshold");
  t1_opt->needs(t2_opt);
  t2_opt->needs(t1_opt);
  anova->add_option("--data", anova_data, "Dataset CSV")->required();
  anova->add_option("--repeats", anova_options.repeats, "Resampling repeats");
  anova->add_option("--representatives", anova_options.representatives,
                    "Samples drawn per group and repeat");
  anova->add_option("--subgroups", anova_options.n_subgroups,
                    "Within-group split count");
  anova->add_option("--alpha", anova_options.alpha,
                    "Variance-homogeneity screen level");
  anova->add_flag("--bartlett", anova_bartlett,
                  "Screen variances with Bartlett instead of median-centered Levene");
  anova->add_flag("--full-group-screen", anova_full_groups,
                  "Screen dimensions once on the full groups instead of per draw");
  anova->add_option("--seed", anova_options.seed, "Resampling seed");
  anova->add_option("--format", anova_format, "Output format")
      ->check(CLI::IsMember({"json", "table"}));
  anova->add_option("--out", anova_out, "Write the report here instead of stdout");

  // ---- predict ----
  auto* predict = app.add_subcommand("predict", "Predict sugar with a saved network");
  std::string predict_model, predict_data, predict_out;
  predict->add_option("--model", predict_model, "Saved model file")->required();
  predict->add_option("--data", predict_data, "Dataset CSV (same feature space "
                      "the network was trained on)")
      ->required();
  predict->add_option("--out", predict_out, "Write predictions here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*synth) {
    spectral_dataset* raw = nullptr;
    check(spectral_dataset_synthesize(synth_profile.c_str(), synth_n, synth_seed, &raw));
    DatasetPtr ds(raw);
    check(spectral_dataset_save_csv(ds.get(), synth_out.c_str()));
    char* text = nullptr;
    check(spectral_dataset_stats_text(ds.get(), &text));
    TextPtr stats(text);
    std::cout << stats.get();
    return 0;
  }

  if (*run) {
    DatasetPtr ds = load_dataset(run_data);
    const auto* options = run_flags.finish();
    char* text = nullptr;
    check(spectral_run_strategy(ds.get(), run_strategy.c_str(), options,
                                run_flags.format == "table" ? 1 : 0, &text));
    TextPtr report(text);
    emit(run_out, report.get());
    if (!run_save_model.empty())
      check(spectral_train_model(ds.get(), run_strategy.c_str(), options,
                                 run_save_model.c_str()));
    return 0;
  }

  if (*compare) {
    DatasetPtr ds = load_dataset(compare_data);
    std::vector<const char*> names;
    names.reserve(compare_strategies.size());
    for (const auto& s : compare_strategies) names.push_back(s.c_str());
    char* text = nullptr;
    check(spectral_compare_strategies(ds.get(), names.data(),
                                      static_cast<int>(names.size()),
                                      compare_flags.finish(),
                                      compare_flags.format == "table" ? 1 : 0, &text));
    TextPtr report(text);
    emit(compare_out, report.get());
    return 0;
  }

  if (*anova) {
    DatasetPtr ds = load_dataset(anova_data);
    anova_options.use_terciles = t1_opt->count() > 0 ? 0 : 1;
    anova_options.bartlett = anova_bartlett ? 1 : 0;
    anova_options.valid_dims_on_full_groups = anova_full_groups ? 1 : 0;
    char* text = nullptr;
    check(spectral_anova(ds.get(), &anova_options,
                         anova_format == "table" ? 1 : 0, &text));
    TextPtr report(text);
    emit(anova_out, report.get());
    return 0;
  }

  if (*predict) {
    DatasetPtr ds = load_dataset(predict_data);
    char* text = nullptr;
    check(spectral_predict_csv(predict_model.c_str(), ds.get(), &text));
    TextPtr csv(text);
    emit(predict_out, csv.get());
    return 0;
  }

  return 2;  // unreachable: a subcommand is required
}
