#include "spectral/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "spectral/error.hpp"
#include "spectral/metrics.hpp"
#include "spectral/parallel.hpp"
#include "spectral/pls.hpp"
#include "spectral/rng.hpp"

namespace spectral {

namespace {

// Substream tags so each consumer gets an independent stream per fold.
constexpr std::uint64_t kTagGa = 0x6761;    // "ga"
constexpr std::uint64_t kTagNn = 0x6e6e;    // "nn"
constexpr std::uint64_t kTagPls = 0x706c73; // "pls"

ArchKind arch_kind_for(ModelKind model) {
  switch (model) {
    case ModelKind::mlp: return ArchKind::mlp;
    case ModelKind::cnn: return ArchKind::cnn;
    case ModelKind::cnn_mlp: return ArchKind::cnn_mlp;
    case ModelKind::mlp_cnn: return ArchKind::mlp_cnn;
    default: break;
  }
  fail(ErrorCode::invalid_argument, "model is not a neural architecture");
}

ModelArch arch_for(ModelKind model, int input_dim, const CvOptions& options) {
  const ArchKind kind = arch_kind_for(model);
  ModelArch arch = options.nn_reduced ? ModelArch::reduced(kind, input_dim)
                                      : ModelArch::standard(kind, input_dim);
  if (!options.nn_mlp_widths.empty()) arch.mlp_widths = options.nn_mlp_widths;
  if (!options.nn_conv_channels.empty()) {
    arch.conv_channels = options.nn_conv_channels;
    // Keep the published alternating kernel pattern at any depth.
    arch.conv_kernels.clear();
    for (std::size_t i = 0; i < arch.conv_channels.size(); ++i) {
      arch.conv_kernels.push_back(i % 2 == 0 ? std::make_pair(3, 1)
                                             : std::make_pair(1, 3));
    }
  }
  if (options.nn_head_width > 0) arch.head_width = options.nn_head_width;
  arch.validate();
  return arch;
}

struct FoldOutcome {
  double rmse = 0;
  double r2 = 0;
  double sse = 0;
  std::vector<double> nn_loss;
  std::vector<double> ga_best;
  std::vector<int> ga_mask;
  bool has_ga = false;
};

// Per-dimension centering plus one global scale factor, fitted on the
// training rows. Without centering, chains that leave a large constant
// component per dimension (SNV then wavelets does) start the dense stack at
// a random fixed point and gradient descent kills the ReLU units before any
// signal flows; without the global rescale, low-variance features keep the
// pre-activation spread bias-dominated, which has the same effect. Relative
// per-dimension variances are kept: dimensions that vary more carry more
// signal here, and flattening them all to unit scale throws that prior away.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

FeatureScaler fit_scaler(const Eigen::MatrixXd& x) {
  FeatureScaler s;
  s.mean = x.colwise().mean();
  const double total_var =
      (x.rowwise() - s.mean.transpose()).array().square().sum() /
      static_cast<double>(x.rows() * x.cols());
  const double scale = total_var > 1e-24 ? std::sqrt(total_var) : 1.0;
  s.std = Eigen::VectorXd::Constant(x.cols(), scale);
  return s;
}

Eigen::MatrixXd apply_scaler(const FeatureScaler& s, const Eigen::MatrixXd& x) {
  return (x.rowwise() - s.mean.transpose()).array().rowwise() /
         s.std.transpose().array();
}

}  // namespace

EvalReport cross_validate(const SpectraDataset& ds, const Strategy& strategy,
                          const CvOptions& options) {
  ds.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const int n = ds.n();
  const FoldSplit split = kfold_split(n, options.folds, options.seed);
  const DatasetStats stats = dataset_stats(ds);

  EvalReport report;
  report.strategy = strategy.text.empty() ? render_strategy(strategy) : strategy.text;
  report.folds = options.folds;
  report.seed = options.seed;
  report.std_dev = stats.std_dev;
  report.per_fold_rmse.resize(static_cast<std::size_t>(options.folds));

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(options.folds));

  parallel_for(0, options.folds, [&](int f) {
    const auto& tr = split.train[static_cast<std::size_t>(f)];
    const auto& va = split.validation[static_cast<std::size_t>(f)];

    Eigen::MatrixXd x_train(tr.size(), ds.dim());
    Eigen::VectorXd y_train(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
      x_train.row(static_cast<Eigen::Index>(i)) = ds.spectra.row(tr[i]);
      y_train[static_cast<Eigen::Index>(i)] = ds.sugar[tr[i]];
    }
    Eigen::MatrixXd x_val(va.size(), ds.dim());
    Eigen::VectorXd y_val(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      x_val.row(static_cast<Eigen::Index>(i)) = ds.spectra.row(va[i]);
      y_val[static_cast<Eigen::Index>(i)] = ds.sugar[va[i]];
    }

    const std::uint64_t fold_seed = derive_seed(options.seed, static_cast<std::uint64_t>(f));

    ChainFitOptions chain_options;
    chain_options.ga = options.ga;
    chain_options.ga.seed = derive_seed(fold_seed, kTagGa);

    const ChainResult chained =
        chain_fit_apply(strategy.steps, x_train, y_train, x_val, chain_options);
    const Eigen::MatrixXd& xt = chained.train;
    const Eigen::MatrixXd& xv = chained.applied;

    FoldOutcome& out = outcomes[static_cast<std::size_t>(f)];
    for (const auto& step : chained.chain.steps) {
      if (step.ga_result) {
        out.has_ga = true;
        out.ga_best = step.ga_result->best_rmsecv_per_generation;
        out.ga_mask = step.ga_result->best.mask;
      }
    }

    Eigen::VectorXd pred;
    switch (strategy.model) {
      case ModelKind::pls: {
        const int a = select_components(xt, y_train, options.pls_inner_folds,
                                        options.pls_max_components,
                                        derive_seed(fold_seed, kTagPls));
        const PlsModel model = pls_fit(xt, y_train, a);
        pred = pls_predict(model, xv);
        break;
      }
      case ModelKind::segpls: {
        const SegmentChoice choice =
            segmented_pls(xt, y_train, strategy.model_arg, options.pls_inner_folds,
                          derive_seed(fold_seed, kTagPls), options.segpls_components);
        const int begin = choice.best_segment * strategy.model_arg;
        const int len = std::min(strategy.model_arg, static_cast<int>(xt.cols()) - begin);
        const PlsModel model =
            pls_fit(xt.middleCols(begin, len), y_train, options.segpls_components);
        pred = pls_predict(model, xv.middleCols(begin, len));
        break;
      }
      default: {
        const ModelArch arch =
            arch_for(strategy.model, static_cast<int>(xt.cols()), options);
        TrainConfig tc = options.nn;
        tc.seed = derive_seed(fold_seed, kTagNn);
        const FeatureScaler scaler = fit_scaler(xt);
        const TrainResult trained = nn_train(arch, apply_scaler(scaler, xt), y_train, tc);
        pred = nn_predict(arch, trained.params, apply_scaler(scaler, xv));
        out.nn_loss = trained.loss_trace;
        break;
      }
    }

    out.rmse = rmse(pred, y_val);
    out.r2 = r_squared(pred, y_val);
    out.sse = (pred - y_val).squaredNorm();
  });

  double sse = 0, r2_sum = 0;
  const bool is_nn = strategy.model != ModelKind::pls && strategy.model != ModelKind::segpls;
  for (int f = 0; f < options.folds; ++f) {
    const FoldOutcome& out = outcomes[static_cast<std::size_t>(f)];
    report.per_fold_rmse[static_cast<std::size_t>(f)] = out.rmse;
    sse += out.sse;
    r2_sum += out.r2;
    if (out.has_ga) {
      GaFoldTrace trace;
      trace.fold = f;
      trace.best_rmsecv = out.ga_best;
      trace.best_mask = out.ga_mask;
      report.ga_trace.push_back(std::move(trace));
    }
    if (is_nn) report.nn_loss_trace.push_back(out.nn_loss);
  }

  report.rmsecv = std::sqrt(sse / n);
  report.r2_mean = r2_sum / options.folds;
  report.closeness_pct = closeness_pct(report.rmsecv, report.std_dev);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

EvalReport cross_validate(const SpectraDataset& ds, const std::string& strategy_text,
                          const CvOptions& options) {
  return cross_validate(ds, parse_strategy(strategy_text), options);
}

std::vector<EvalReport> compare_strategies(const SpectraDataset& ds,
                                           const std::vector<std::string>& strategies,
                                           const CvOptions& options,
                                           std::vector<std::string>* row_errors) {
  std::vector<EvalReport> reports(strategies.size());
  if (row_errors) row_errors->assign(strategies.size(), "");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    try {
      reports[i] = cross_validate(ds, strategies[i], options);
    } catch (const std::exception& e) {
      if (!row_errors) throw;
      reports[i] = EvalReport{};
      reports[i].strategy = strategies[i];
      (*row_errors)[i] = e.what();
    }
  }
  return reports;
}

void train_and_save_model(const SpectraDataset& ds, const Strategy& strategy,
                          const CvOptions& options, const std::string& path) {
  ds.validate();
  require(strategy.model != ModelKind::pls && strategy.model != ModelKind::segpls,
          ErrorCode::invalid_argument,
          "only neural models serialize; PLS refits in milliseconds");

  ChainFitOptions chain_options;
  chain_options.ga = options.ga;
  chain_options.ga.seed = derive_seed(options.seed, kTagGa);

  const Eigen::MatrixXd empty(0, ds.dim());
  const ChainResult chained =
      chain_fit_apply(strategy.steps, ds.spectra, ds.sugar, empty, chain_options);

  const ModelArch arch =
      arch_for(strategy.model, static_cast<int>(chained.train.cols()), options);
  TrainConfig tc = options.nn;
  tc.seed = derive_seed(options.seed, kTagNn);
  const FeatureScaler scaler = fit_scaler(chained.train);
  const TrainResult trained =
      nn_train(arch, apply_scaler(scaler, chained.train), ds.sugar, tc);
  save_model(arch, trained.params, path, scaler.mean, scaler.std);
}

}  // namespace spectral
