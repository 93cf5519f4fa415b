#include "spectral/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>

#include "spectral/error.hpp"

namespace spectral {

namespace {

std::string step_name(StepKind kind) {
  switch (kind) {
    case StepKind::sg: return "SG";
    case StepKind::msc: return "MSC";
    case StepKind::snv: return "SNV";
    case StepKind::d1: return "D1";
    case StepKind::d2: return "D2";
    case StepKind::pca: return "PCA";
    case StepKind::wd: return "WD";
    case StepKind::ga: return "GA";
  }
  return "?";
}

std::string model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::pls: return "PLS";
    case ModelKind::segpls: return "SEGPLS";
    case ModelKind::mlp: return "MLP";
    case ModelKind::cnn: return "CNN";
    case ModelKind::cnn_mlp: return "CNN-MLP";
    case ModelKind::mlp_cnn: return "MLP-CNN";
  }
  return "?";
}

std::string render_step(const PreprocessStep& step) {
  switch (step.kind) {
    case StepKind::pca:
    case StepKind::wd:
    case StepKind::ga:
      return step_name(step.kind) + "(" + std::to_string(step.arg) + ")";
    default:
      return step_name(step.kind);
  }
}

/// Splits "NAME" or "NAME(int)" into the name and an optional argument.
struct Token {
  std::string name;
  bool has_arg = false;
  int arg = 0;
};

Token parse_token(const std::string& raw) {
  Token tok;
  const std::size_t open = raw.find('(');
  if (open == std::string::npos) {
    tok.name = raw;
    return tok;
  }
  require(!raw.empty() && raw.back() == ')', ErrorCode::parse,
          "strategy: malformed token '" + raw + "'");
  tok.name = raw.substr(0, open);
  const std::string inner = raw.substr(open + 1, raw.size() - open - 2);
  const char* first = inner.data();
  const char* last = first + inner.size();
  const auto res = std::from_chars(first, last, tok.arg);
  require(res.ec == std::errc{} && res.ptr == last && !inner.empty(), ErrorCode::parse,
          "strategy: bad integer argument in '" + raw + "'");
  require(tok.arg > 0, ErrorCode::parse,
          "strategy: argument must be positive in '" + raw + "'");
  tok.has_arg = true;
  return tok;
}

PreprocessStep parse_step_token(const std::string& raw) {
  const Token tok = parse_token(raw);
  PreprocessStep step;
  if (tok.name == "SG") step.kind = StepKind::sg;
  else if (tok.name == "MSC") step.kind = StepKind::msc;
  else if (tok.name == "SNV") step.kind = StepKind::snv;
  else if (tok.name == "D1") step.kind = StepKind::d1;
  else if (tok.name == "D2") step.kind = StepKind::d2;
  else if (tok.name == "PCA") step.kind = StepKind::pca;
  else if (tok.name == "WD") step.kind = StepKind::wd;
  else if (tok.name == "GA") step.kind = StepKind::ga;
  else fail(ErrorCode::parse, "strategy: unknown step '" + raw + "'");

  const bool wants_arg = step.kind == StepKind::pca || step.kind == StepKind::wd ||
                         step.kind == StepKind::ga;
  require(tok.has_arg == wants_arg, ErrorCode::parse,
          wants_arg ? "strategy: step '" + raw + "' needs an integer argument"
                    : "strategy: step '" + raw + "' takes no argument");
  step.arg = tok.arg;
  return step;
}

}  // namespace

Strategy parse_strategy(const std::string& text) {
  std::string compact;
  compact.reserve(text.size());
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  require(!compact.empty(), ErrorCode::parse, "strategy: empty");

  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const std::size_t sep = compact.find('>', start);
    if (sep == std::string::npos) {
      tokens.push_back(compact.substr(start));
      break;
    }
    tokens.push_back(compact.substr(start, sep - start));
    start = sep + 1;
  }
  for (const auto& t : tokens) {
    require(!t.empty(), ErrorCode::parse, "strategy: empty token in '" + text + "'");
  }
  require(tokens.size() >= 2, ErrorCode::parse,
          "strategy: expected at least a chain ('Non' or steps) and a model");

  Strategy strategy;

  const Token model_tok = parse_token(tokens.back());
  if (model_tok.name == "PLS") strategy.model = ModelKind::pls;
  else if (model_tok.name == "SEGPLS") strategy.model = ModelKind::segpls;
  else if (model_tok.name == "MLP") strategy.model = ModelKind::mlp;
  else if (model_tok.name == "CNN") strategy.model = ModelKind::cnn;
  else if (model_tok.name == "CNN-MLP") strategy.model = ModelKind::cnn_mlp;
  else if (model_tok.name == "MLP-CNN") strategy.model = ModelKind::mlp_cnn;
  else fail(ErrorCode::parse, "strategy: unknown model '" + tokens.back() + "'");

  const bool model_wants_arg = strategy.model == ModelKind::segpls;
  require(model_tok.has_arg == model_wants_arg, ErrorCode::parse,
          model_wants_arg ? "strategy: SEGPLS needs a segment length, e.g. SEGPLS(50)"
                          : "strategy: model '" + tokens.back() + "' takes no argument");
  strategy.model_arg = model_tok.arg;

  if (tokens.front() == "Non") {
    require(tokens.size() == 2, ErrorCode::parse,
            "strategy: 'Non' cannot be combined with other steps");
  } else {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      strategy.steps.push_back(parse_step_token(tokens[i]));
    }
  }

  strategy.text = render_strategy(strategy);
  return strategy;
}

std::string render_strategy(const Strategy& strategy) {
  std::string out;
  if (strategy.steps.empty()) {
    out = "Non";
  } else {
    for (std::size_t i = 0; i < strategy.steps.size(); ++i) {
      if (i) out += '>';
      out += render_step(strategy.steps[i]);
    }
  }
  out += '>';
  out += model_name(strategy.model);
  if (strategy.model == ModelKind::segpls) {
    out += "(" + std::to_string(strategy.model_arg) + ")";
  }
  return out;
}

Eigen::VectorXd sg_smooth(const Eigen::VectorXd& x, int window, int polyorder) {
  const int dim = static_cast<int>(x.size());
  require(window >= 3 && window % 2 == 1, ErrorCode::invalid_argument,
          "sg_smooth: window must be odd and >= 3");
  require(polyorder >= 0 && polyorder < window, ErrorCode::invalid_argument,
          "sg_smooth: polyorder must be in [0, window)");
  require(dim >= window, ErrorCode::invalid_argument,
          "sg_smooth: input shorter than the window");

  const int half = window / 2;
  const int terms = polyorder + 1;

  // Least-squares fit over offsets -half..half: weights for evaluating the
  // fitted polynomial at every offset e are rows of V (V^T V)^{-1} V^T.
  Eigen::MatrixXd vandermonde(window, terms);
  for (int r = 0; r < window; ++r) {
    const double e = static_cast<double>(r - half);
    double pw = 1.0;
    for (int c = 0; c < terms; ++c) {
      vandermonde(r, c) = pw;
      pw *= e;
    }
  }
  const Eigen::MatrixXd gram = vandermonde.transpose() * vandermonde;
  // hat = V (V^T V)^{-1} V^T, row e = evaluation weights at offset e - half.
  const Eigen::MatrixXd hat =
      vandermonde * gram.ldlt().solve(vandermonde.transpose());

  Eigen::VectorXd out(dim);
  const Eigen::VectorXd center = hat.row(half);
  for (int i = half; i < dim - half; ++i) {
    out[i] = center.dot(x.segment(i - half, window));
  }
  // No full window fits near the ends: reuse the first (last) full window's
  // fit, evaluated off-center. Polynomials up to `polyorder` stay exact.
  const Eigen::VectorXd head = x.head(window);
  const Eigen::VectorXd tail = x.tail(window);
  for (int i = 0; i < half; ++i) {
    out[i] = hat.row(i).dot(head);
    out[dim - 1 - i] = hat.row(window - 1 - i).dot(tail);
  }
  return out;
}

Eigen::VectorXd snv(const Eigen::VectorXd& x) {
  require(x.size() >= 2, ErrorCode::invalid_argument, "snv: need at least 2 points");
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / static_cast<double>(x.size());
  const double sd = std::sqrt(var);
  require(sd > 1e-12, ErrorCode::numeric, "snv: spectrum is constant");
  return (x.array() - mean) / sd;
}

Eigen::VectorXd derivative(const Eigen::VectorXd& x, int order) {
  require(order == 1 || order == 2, ErrorCode::invalid_argument,
          "derivative: order must be 1 or 2");
  require(x.size() >= 2, ErrorCode::invalid_argument,
          "derivative: need at least 2 points");
  const int dim = static_cast<int>(x.size());
  Eigen::VectorXd out(dim);
  out[0] = x[1] - x[0];
  out[dim - 1] = x[dim - 1] - x[dim - 2];
  for (int i = 1; i + 1 < dim; ++i) {
    out[i] = 0.5 * (x[i + 1] - x[i - 1]);
  }
  if (order == 2) return derivative(out, 1);
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> haar_stage(const Eigen::VectorXd& x) {
  require(x.size() >= 2 && x.size() % 2 == 0, ErrorCode::invalid_argument,
          "haar_stage: length must be even");
  const int half = static_cast<int>(x.size()) / 2;
  Eigen::VectorXd approx(half), detail(half);
  const double inv_sqrt2 = 0.7071067811865475244;
  for (int i = 0; i < half; ++i) {
    approx[i] = (x[2 * i] + x[2 * i + 1]) * inv_sqrt2;
    detail[i] = (x[2 * i] - x[2 * i + 1]) * inv_sqrt2;
  }
  return {std::move(approx), std::move(detail)};
}

Eigen::VectorXd wavelet_decompose(const Eigen::VectorXd& x, int target_dim) {
  require(target_dim >= 1, ErrorCode::invalid_argument,
          "wavelet_decompose: target dimension must be positive");
  int len = static_cast<int>(x.size());
  require(target_dim <= len, ErrorCode::invalid_argument,
          "wavelet_decompose: target dimension exceeds input length");
  // The target must be reachable by halving: len / 2^levels == target.
  int probe = len;
  while (probe > target_dim && probe % 2 == 0) probe /= 2;
  require(probe == target_dim, ErrorCode::invalid_argument,
          "wavelet_decompose: " + std::to_string(target_dim) +
              " is not the input length " + std::to_string(len) +
              " divided by a power of two");

  Eigen::VectorXd cur = x;
  while (static_cast<int>(cur.size()) > target_dim) {
    cur = haar_stage(cur).first;
  }
  return cur;
}

Eigen::VectorXd msc_reference(const Eigen::MatrixXd& train) {
  require(train.rows() >= 1, ErrorCode::invalid_argument, "msc: empty training block");
  return train.colwise().mean();
}

Eigen::VectorXd msc_apply(const Eigen::VectorXd& x, const Eigen::VectorXd& reference) {
  require(x.size() == reference.size(), ErrorCode::invalid_argument,
          "msc: spectrum and reference lengths differ");
  require(x.size() >= 2, ErrorCode::invalid_argument, "msc: need at least 2 points");
  const double ref_mean = reference.mean();
  const double x_mean = x.mean();
  const double ref_var = (reference.array() - ref_mean).square().sum();
  require(ref_var > 1e-12, ErrorCode::numeric, "msc: reference spectrum is constant");
  // OLS of x against the reference: x ~ a + b * ref.
  const double b = ((x.array() - x_mean) * (reference.array() - ref_mean)).sum() / ref_var;
  require(std::abs(b) > 1e-9, ErrorCode::numeric,
          "msc: spectrum has no slope against the reference");
  const double a = x_mean - b * ref_mean;
  return (x.array() - a) / b;
}

PcaModel pca_fit(const Eigen::MatrixXd& train, int k) {
  const int n = static_cast<int>(train.rows());
  const int dim = static_cast<int>(train.cols());
  require(n >= 2, ErrorCode::invalid_argument, "pca: need at least 2 samples");
  require(k >= 1 && k <= std::min(n - 1, dim), ErrorCode::invalid_argument,
          "pca: component count must be in [1, min(n - 1, dim)]");

  PcaModel model;
  model.mean = train.colwise().mean();
  const Eigen::MatrixXd centered = train.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  model.basis = svd.matrixV().leftCols(k);

  // Fix each component's sign: largest-magnitude loading positive, so the
  // output does not depend on the SVD implementation.
  for (int c = 0; c < k; ++c) {
    int arg = 0;
    model.basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.basis(arg, c) < 0) model.basis.col(c) = -model.basis.col(c);
  }
  return model;
}

Eigen::MatrixXd pca_apply(const PcaModel& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.mean.size(), ErrorCode::invalid_argument,
          "pca_apply: feature count does not match the model");
  return (X.rowwise() - model.mean.transpose()) * model.basis;
}

namespace {

Eigen::MatrixXd apply_rowwise(const Eigen::MatrixXd& X,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn) {
  Eigen::MatrixXd out;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd row = fn(X.row(i).transpose());
    if (i == 0) out.resize(X.rows(), row.size());
    out.row(i) = row.transpose();
  }
  return out;
}

Eigen::MatrixXd apply_fitted_step(const FittedStep& fs, const Eigen::MatrixXd& X) {
  switch (fs.step.kind) {
    case StepKind::sg:
      return apply_rowwise(X, [&](const Eigen::VectorXd& r) {
        return sg_smooth(r, fs.step.sg_window, fs.step.sg_polyorder);
      });
    case StepKind::snv:
      return apply_rowwise(X, [](const Eigen::VectorXd& r) { return snv(r); });
    case StepKind::d1:
      return apply_rowwise(X, [](const Eigen::VectorXd& r) { return derivative(r, 1); });
    case StepKind::d2:
      return apply_rowwise(X, [](const Eigen::VectorXd& r) { return derivative(r, 2); });
    case StepKind::wd:
      return apply_rowwise(X, [&](const Eigen::VectorXd& r) {
        return wavelet_decompose(r, fs.step.arg);
      });
    case StepKind::msc:
      return apply_rowwise(X, [&](const Eigen::VectorXd& r) {
        return msc_apply(r, fs.msc_ref);
      });
    case StepKind::pca:
      return pca_apply(fs.pca, X);
    case StepKind::ga: {
      Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(fs.ga_mask.size()));
      for (std::size_t j = 0; j < fs.ga_mask.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = X.col(fs.ga_mask[j]);
      }
      return out;
    }
  }
  fail(ErrorCode::invalid_argument, "chain: unreachable step kind");
}

}  // namespace

Eigen::MatrixXd FittedChain::apply(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd cur = X;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      cur = apply_fitted_step(steps[i], cur);
    } catch (const Error& e) {
      fail(e.code(), "step " + std::to_string(i + 1) + " (" +
                         render_step(steps[i].step) + "): " + e.what());
    }
  }
  return cur;
}

ChainResult chain_fit_apply(const std::vector<PreprocessStep>& steps,
                            const Eigen::MatrixXd& train_x,
                            const Eigen::VectorXd& train_y,
                            const Eigen::MatrixXd& apply_x,
                            const ChainFitOptions& options) {
  require(train_x.cols() == apply_x.cols() || apply_x.rows() == 0,
          ErrorCode::invalid_argument,
          "chain: training and application blocks have different widths");
  require(train_x.rows() == train_y.size(), ErrorCode::invalid_argument,
          "chain: training labels do not match the training block");

  ChainResult result;
  result.train = train_x;
  result.applied = apply_x;

  for (std::size_t i = 0; i < steps.size(); ++i) {
    FittedStep fs;
    fs.step = steps[i];
    try {
      // Fit whatever state the step needs on the training block only.
      switch (fs.step.kind) {
        case StepKind::msc:
          fs.msc_ref = msc_reference(result.train);
          break;
        case StepKind::pca:
          fs.pca = pca_fit(result.train, fs.step.arg);
          break;
        case StepKind::ga: {
          GaConfig config = options.ga;
          config.k_select = fs.step.arg;
          fs.ga_result = ga_run(result.train, train_y, config);
          fs.ga_mask = fs.ga_result->best.mask;
          break;
        }
        default:
          break;
      }
      result.train = apply_fitted_step(fs, result.train);
      if (result.applied.rows() > 0) {
        result.applied = apply_fitted_step(fs, result.applied);
      }
    } catch (const Error& e) {
      fail(e.code(), "step " + std::to_string(i + 1) + " (" +
                         render_step(fs.step) + "): " + e.what());
    }
    result.chain.steps.push_back(std::move(fs));
  }
  return result;
}

}  // namespace spectral
