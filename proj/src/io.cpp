#include "sgl/io.hpp"

#include "sgl/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

namespace sgl {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> to_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  double v = 0;
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

int to_label(const std::string& token, std::size_t line) {
  auto v = to_number(token);
  if (!v || *v != std::floor(*v)) throw FormatError("label '" + token + "' is not an integer", line);
  return static_cast<int>(*v);
}

Matrix<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix<double> X(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) X(i, j) = rows[i][j];
  return X;
}

void check_size(const std::vector<std::vector<double>>& rows) {
  if (rows.size() < 2) throw FormatError("dataset needs at least two samples", 0);
  if (rows.front().empty()) throw FormatError("dataset has no feature columns", 0);
}

}  // namespace

DataFormat parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "dense") return DataFormat::dense;
  throw ConfigError("unknown input format '" + name + "'");
}

Dataset parse_csv(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  Labeling labels;
  bool has_label = false;
  std::size_t width = 0;
  std::size_t lineno = 0;
  bool first = true;

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');

    if (first) {
      first = false;
      bool numeric = true;
      for (const auto& f : fields) numeric = numeric && to_number(f).has_value();
      if (!numeric) {
        has_label = fields.back() == "label";
        width = fields.size();
        continue;
      }
      width = fields.size();
    }

    if (fields.size() != width)
      throw FormatError(source + ": expected " + std::to_string(width) + " fields, found " +
                            std::to_string(fields.size()),
                        lineno);
    const std::size_t nfeat = has_label ? width - 1 : width;
    std::vector<double> row(nfeat);
    for (std::size_t j = 0; j < nfeat; ++j) {
      auto v = to_number(fields[j]);
      if (!v) throw FormatError(source + ": cannot parse '" + fields[j] + "'", lineno);
      if (!std::isfinite(*v)) throw FormatError(source + ": non-finite value", lineno);
      row[j] = *v;
    }
    if (has_label) labels.push_back(to_label(fields.back(), lineno));
    rows.push_back(std::move(row));
  }

  check_size(rows);
  Dataset out;
  out.X = to_matrix(rows);
  if (has_label) out.truth = detail::compact(labels);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     const std::optional<std::filesystem::path>& labels_path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);

  Dataset out;
  if (format == DataFormat::csv) {
    out = parse_csv(in, path.string());
  } else {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::vector<double> row;
      std::string token;
      while (ss >> token) {
        auto v = to_number(token);
        if (!v || !std::isfinite(*v)) throw FormatError(path.string() + ": cannot parse '" + token + "'", lineno);
        row.push_back(*v);
      }
      if (row.empty()) continue;
      if (!rows.empty() && row.size() != rows.front().size())
        throw FormatError(path.string() + ": inconsistent row width", lineno);
      rows.push_back(std::move(row));
    }
    check_size(rows);
    out.X = to_matrix(rows);
  }

  if (labels_path) {
    std::ifstream lin(*labels_path);
    if (!lin) throw FormatError("cannot open " + labels_path->string(), 0);
    Labeling labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lin, line)) {
      ++lineno;
      auto token = trim(line);
      if (token.empty()) continue;
      labels.push_back(to_label(token, lineno));
    }
    if (static_cast<Index>(labels.size()) != out.X.rows())
      throw FormatError(labels_path->string() + ": label count does not match sample count", 0);
    out.truth = detail::compact(labels);
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out.precision(17);
  for (Index j = 0; j < data.X.cols(); ++j) out << (j ? "," : "") << 'f' << (j + 1);
  if (data.truth) out << ",label";
  out << '\n';
  for (Index i = 0; i < data.X.rows(); ++i) {
    for (Index j = 0; j < data.X.cols(); ++j) out << (j ? "," : "") << data.X(i, j);
    if (data.truth) out << ',' << (*data.truth)[i];
    out << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string(), 0);
}

SynthKind parse_synth_kind(const std::string& name) {
  if (name == "blobs") return SynthKind::blobs;
  if (name == "rings") return SynthKind::rings;
  if (name == "moons") return SynthKind::moons;
  throw ConfigError("unknown synthetic kind '" + name + "'");
}

Dataset make_synthetic(const SynthOptions& opts) {
  const int classes = opts.kind == SynthKind::blobs ? opts.classes : 2;
  if (classes < 1) throw ConfigError("synthetic class count must be positive");
  if (opts.n < 2 * classes) throw ConfigError("too few samples for the requested classes");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  Dataset out;
  out.X.resize(opts.n, 2);
  out.truth = Labeling(opts.n);
  std::vector<int> sizes(classes, opts.n / classes);
  for (int c = 0; c < opts.n % classes; ++c) ++sizes[c];

  Index row = 0;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < sizes[c]; ++i, ++row) {
      (*out.truth)[row] = c;
      double x = 0, y = 0;
      switch (opts.kind) {
        case SynthKind::blobs: {
          const double noise = opts.noise < 0 ? 0.1 : opts.noise;
          const double radius = classes > 1 ? opts.separation / (2.0 * std::sin(pi / classes)) : 0.0;
          const double angle = 2.0 * pi * c / classes;
          x = radius * std::cos(angle) + noise * gauss(rng);
          y = radius * std::sin(angle) + noise * gauss(rng);
          break;
        }
        case SynthKind::rings: {
          const double noise = opts.noise < 0 ? 0.05 : opts.noise;
          const double radius = (c == 0 ? 1.0 : 3.0) + noise * gauss(rng);
          const double angle = 2.0 * pi * unif(rng);
          x = radius * std::cos(angle);
          y = radius * std::sin(angle);
          break;
        }
        case SynthKind::moons: {
          const double noise = opts.noise < 0 ? 0.05 : opts.noise;
          const double angle = pi * unif(rng);
          if (c == 0) {
            x = std::cos(angle);
            y = std::sin(angle);
          } else {
            x = 1.0 - std::cos(angle);
            y = 0.5 - std::sin(angle);
          }
          x += noise * gauss(rng);
          y += noise * gauss(rng);
          break;
        }
      }
      out.X(row, 0) = x;
      out.X(row, 1) = y;
    }
  }
  return out;
}

}  // namespace sgl
