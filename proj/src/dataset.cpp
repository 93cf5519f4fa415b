#include "spectral/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectral/error.hpp"
#include "spectral/rng.hpp"

namespace spectral {

void SpectraDataset::validate() const {
  const auto rows = spectra.rows();
  require(static_cast<Eigen::Index>(ids.size()) == rows,
          ErrorCode::invalid_argument, "dataset: id count does not match row count");
  require(sugar.size() == rows, ErrorCode::invalid_argument,
          "dataset: sugar count does not match row count");
  require(rows > 0 && spectra.cols() > 0, ErrorCode::invalid_argument,
          "dataset: empty");
  require(spectra.allFinite(), ErrorCode::invalid_argument,
          "dataset: spectra contain non-finite values");
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(std::isfinite(sugar[i]) && sugar[i] > 0.0, ErrorCode::invalid_argument,
            "dataset: sugar must be positive and finite (row " + std::to_string(i) + ")");
  }
}

void SynthConfig::validate() const {
  require(n_samples > 0, ErrorCode::invalid_argument, "synth: n_samples must be positive");
  require(dim > 0, ErrorCode::invalid_argument, "synth: dim must be positive");
  require(sugar_std >= 0 && scatter_std >= 0 && offset_std >= 0 && noise_std >= 0,
          ErrorCode::invalid_argument, "synth: standard deviations must be non-negative");
  require(sugar_mean > 0, ErrorCode::invalid_argument, "synth: sugar_mean must be positive");
  for (const auto& p : peaks) {
    require(p.width > 0, ErrorCode::invalid_argument, "synth: peak width must be positive");
  }
  for (const auto& p : interferents) {
    require(p.width > 0, ErrorCode::invalid_argument, "synth: peak width must be positive");
  }
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, int line_no, const char* what) {
  double v = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    fail(ErrorCode::parse, "csv line " + std::to_string(line_no) + ": bad " +
                               what + " value '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace

SpectraDataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string_view> lines;
  {
    std::string_view rest = text;
    while (!rest.empty()) {
      std::size_t nl = rest.find('\n');
      std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest = rest.substr(nl + 1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
  }
  require(lines.size() >= 2, ErrorCode::parse,
          "csv: expected a header and at least one data row in '" + path + "'");

  const auto header = split_csv_line(lines[0]);
  require(header.size() >= 3, ErrorCode::parse, "csv header: need id, wavelengths, sugar");
  require(header.front() == "id", ErrorCode::parse, "csv header: first column must be 'id'");
  require(header.back() == "sugar", ErrorCode::parse, "csv header: last column must be 'sugar'");
  const int dim = static_cast<int>(header.size()) - 2;
  for (int j = 0; j < dim; ++j) {
    const std::string expected = "w" + std::to_string(j);
    require(header[static_cast<std::size_t>(j + 1)] == expected, ErrorCode::parse,
            "csv header: column " + std::to_string(j + 1) + " must be '" + expected + "'");
  }

  const int n = static_cast<int>(lines.size()) - 1;
  SpectraDataset ds;
  ds.ids.reserve(static_cast<std::size_t>(n));
  ds.spectra.resize(n, dim);
  ds.sugar.resize(n);

  for (int i = 0; i < n; ++i) {
    const int line_no = i + 2;  // 1-based, after the header
    const auto fields = split_csv_line(lines[static_cast<std::size_t>(i + 1)]);
    if (static_cast<int>(fields.size()) != dim + 2) {
      fail(ErrorCode::parse, "csv line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(dim + 2) + " fields, got " +
                                 std::to_string(fields.size()));
    }
    ds.ids.emplace_back(fields[0]);
    for (int j = 0; j < dim; ++j) {
      ds.spectra(i, j) = parse_double(fields[static_cast<std::size_t>(j + 1)], line_no, "spectrum");
    }
    ds.sugar[i] = parse_double(fields.back(), line_no, "sugar");
  }

  ds.validate();
  return ds;
}

void save_csv(const SpectraDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for writing");

  std::string line = "id";
  for (int j = 0; j < ds.dim(); ++j) line += ",w" + std::to_string(j);
  line += ",sugar\n";
  out << line;

  for (int i = 0; i < ds.n(); ++i) {
    line = ds.ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < ds.dim(); ++j) {
      line += ',';
      line += format_double(ds.spectra(i, j));
    }
    line += ',';
    line += format_double(ds.sugar[i]);
    line += '\n';
    out << line;
  }
  out.flush();
  require(out.good(), ErrorCode::io, "write to '" + path + "' failed");
}

SpectraDataset synthesize(const SynthConfig& config) {
  config.validate();
  // One sub-stream per random component, so changing e.g. noise_std never
  // shifts the sugar draws of the same seed.
  Rng sugar_rng(derive_seed(config.seed, 0));
  Rng scatter_rng(derive_seed(config.seed, 1));
  Rng offset_rng(derive_seed(config.seed, 2));
  Rng noise_rng(derive_seed(config.seed, 3));
  Rng interferent_rng(derive_seed(config.seed, 4));
  const int n = config.n_samples;
  const int dim = config.dim;

  SpectraDataset ds;
  ds.ids.reserve(static_cast<std::size_t>(n));
  ds.spectra.resize(n, dim);
  ds.sugar.resize(n);

  // Fixed smooth baseline over t in [0, 1].
  Eigen::VectorXd baseline(dim);
  Eigen::MatrixXd bands(static_cast<int>(config.peaks.size()), dim);
  for (int j = 0; j < dim; ++j) {
    const double t = (dim == 1) ? 0.0 : static_cast<double>(j) / (dim - 1);
    constexpr double two_pi = 6.283185307179586476925286766559;
    baseline[j] = config.baseline_amplitude * (0.5 + 0.3 * std::sin(two_pi * t) + 0.2 * t);
    for (std::size_t p = 0; p < config.peaks.size(); ++p) {
      const auto& peak = config.peaks[p];
      const double d = (static_cast<double>(j) - peak.center) / peak.width;
      bands(static_cast<int>(p), j) = peak.amplitude * std::exp(-0.5 * d * d);
    }
  }
  const Eigen::VectorXd band_sum =
      config.peaks.empty() ? Eigen::VectorXd::Zero(dim)
                           : Eigen::VectorXd(bands.colwise().sum().transpose());

  std::vector<Eigen::VectorXd> interferent_profiles;
  interferent_profiles.reserve(config.interferents.size());
  for (const auto& peak : config.interferents) {
    Eigen::VectorXd profile(dim);
    for (int j = 0; j < dim; ++j) {
      const double d = (static_cast<double>(j) - peak.center) / peak.width;
      profile[j] = peak.amplitude * std::exp(-0.5 * d * d);
    }
    interferent_profiles.push_back(std::move(profile));
  }

  const int id_width = static_cast<int>(std::to_string(n).size());
  char id_buf[32];

  for (int i = 0; i < n; ++i) {
    double sugar = sugar_rng.normal(config.sugar_mean, config.sugar_std);
    sugar = std::max(sugar, 0.01);
    if (config.label_decimals >= 0) {
      const double scale = std::pow(10.0, config.label_decimals);
      sugar = std::round(sugar * scale) / scale;
      sugar = std::max(sugar, 1.0 / scale);
    }
    ds.sugar[i] = sugar;

    const double m =
        (config.scatter_std > 0) ? scatter_rng.normal(1.0, config.scatter_std) : 1.0;
    const double b =
        (config.offset_std > 0) ? offset_rng.normal(0.0, config.offset_std) : 0.0;

    Eigen::VectorXd clean = baseline + sugar * band_sum;
    for (const auto& profile : interferent_profiles) {
      clean += interferent_rng.normal(0.0, 1.0) * profile;
    }
    ds.spectra.row(i) = (m * clean).transpose();
    if (config.offset_std > 0) ds.spectra.row(i).array() += b;
    if (config.noise_std > 0) {
      for (int j = 0; j < dim; ++j) {
        ds.spectra(i, j) += noise_rng.normal(0.0, config.noise_std);
      }
    }

    std::snprintf(id_buf, sizeof(id_buf), "s%0*d", id_width, i + 1);
    ds.ids.emplace_back(id_buf);
  }

  ds.validate();
  return ds;
}

SynthConfig pear_profile(int n_samples, std::uint64_t seed) {
  SynthConfig c;
  c.n_samples = n_samples;
  c.dim = 1600;
  c.sugar_mean = 12.04;
  c.sugar_std = 0.95;
  c.peaks = {
      {75.0, 12.0, 0.0040},
      {400.0, 40.0, 0.0030},
      {880.0, 60.0, 0.0020},
      {1280.0, 25.0, 0.0025},
  };
  c.baseline_amplitude = 0.5;
  c.scatter_std = 0.08;
  c.offset_std = 0.02;
  c.noise_std = 5e-4;
  c.seed = seed;
  c.label_decimals = 1;
  return c;
}

SynthConfig navel_profile(int n_samples, std::uint64_t seed) {
  SynthConfig c;
  c.n_samples = n_samples;
  c.dim = 1600;
  c.sugar_mean = 14.57;
  c.sugar_std = 1.64;
  c.peaks = {
      {120.0, 18.0, 0.0035},
      {520.0, 50.0, 0.0028},
      {1000.0, 45.0, 0.0020},
      {1350.0, 35.0, 0.0030},
  };
  c.baseline_amplitude = 0.5;
  c.scatter_std = 0.10;
  c.offset_std = 0.03;
  c.noise_std = 6e-4;
  c.seed = seed;
  c.label_decimals = 1;
  return c;
}

FoldSplit kfold_split(int n, int k, std::uint64_t seed) {
  require(k >= 2, ErrorCode::invalid_argument, "kfold: need at least 2 folds");
  require(k <= n, ErrorCode::invalid_argument, "kfold: more folds than samples");

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.validation.assign(static_cast<std::size_t>(k), {});
  split.train.assign(static_cast<std::size_t>(k), {});

  // Round-robin deal keeps fold sizes within one of each other.
  for (int i = 0; i < n; ++i) {
    split.validation[static_cast<std::size_t>(i % k)].push_back(order[static_cast<std::size_t>(i)]);
  }
  for (int f = 0; f < k; ++f) {
    auto& val = split.validation[static_cast<std::size_t>(f)];
    std::sort(val.begin(), val.end());
    auto& train = split.train[static_cast<std::size_t>(f)];
    train.reserve(static_cast<std::size_t>(n) - val.size());
    std::size_t vi = 0;
    for (int i = 0; i < n; ++i) {
      if (vi < val.size() && val[vi] == i) {
        ++vi;
      } else {
        train.push_back(i);
      }
    }
  }
  return split;
}

DatasetStats dataset_stats(const SpectraDataset& ds, StdForm form) {
  ds.validate();
  DatasetStats s;
  const auto& y = ds.sugar;
  const int n = ds.n();
  s.mean = y.mean();
  const double ss = (y.array() - s.mean).matrix().squaredNorm();
  const int denom = (form == StdForm::sample) ? n - 1 : n;
  require(denom > 0, ErrorCode::invalid_argument,
          "dataset_stats: sample standard deviation needs at least 2 samples");
  s.std_dev = std::sqrt(ss / denom);
  s.min = y.minCoeff();
  s.max = y.maxCoeff();

  std::vector<double> sorted(y.data(), y.data() + n);
  std::sort(sorted.begin(), sorted.end());
  s.distinct = static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
  return s;
}

}  // namespace spectral
