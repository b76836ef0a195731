#include "sgl/run.hpp"

#include "sgl/metrics.hpp"
#include "sgl/multi_kernel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace sgl {

using nlohmann::json;

namespace {

const char* mode_name(Mode m) { return m == Mode::cluster ? "cluster" : "ssl"; }

const char* synth_name(SynthKind k) {
  switch (k) {
    case SynthKind::blobs: return "blobs";
    case SynthKind::rings: return "rings";
    case SynthKind::moons: return "moons";
  }
  return "?";
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<T>();
}

std::vector<HistoryRow> to_rows(const std::vector<IterationRecord>& records, bool rank_mode) {
  std::vector<HistoryRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    HistoryRow row;
    row.iteration = static_cast<int>(i) + 1;
    row.objective = records[i].objective;
    if (rank_mode) row.eig_sum = records[i].eig_sum;
    row.gamma = records[i].gamma;
    row.components = records[i].components;
    rows.push_back(row);
  }
  return rows;
}

SgskConfig fit_config(const RunConfig& cfg) {
  SgskConfig out;
  out.c = cfg.c;
  out.k = cfg.k;
  out.gamma0 = cfg.gamma0;
  out.gamma_adapt = cfg.gamma_adapt;
  out.seed = cfg.seed;
  out.max_outer = cfg.max_outer;
  return out;
}

std::vector<std::string> kernel_names(const std::vector<KernelSpec>& specs) {
  std::vector<std::string> out;
  for (const auto& s : specs) out.push_back(to_string(s));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

json config_to_json(const RunConfig& cfg) {
  json j;
  j["mode"] = mode_name(cfg.mode);
  j["input"] = cfg.input ? json(cfg.input->string()) : json(nullptr);
  j["format"] = cfg.format == DataFormat::csv ? "csv" : "dense";
  j["labels"] = cfg.labels_path ? json(cfg.labels_path->string()) : json(nullptr);
  if (cfg.synth) {
    j["synth"] = {{"kind", synth_name(cfg.synth->kind)},
                  {"n", cfg.synth->n},
                  {"seed", cfg.synth->seed},
                  {"classes", cfg.synth->classes},
                  {"noise", cfg.synth->noise}};
  } else {
    j["synth"] = nullptr;
  }
  j["kernels"] = kernel_names(cfg.kernels);
  j["multi_kernel"] = cfg.multi_kernel;
  j["c"] = cfg.c;
  j["k"] = cfg.k;
  j["gamma0"] = optional_json(cfg.gamma0);
  j["gamma_adapt"] = cfg.gamma_adapt;
  j["seed"] = cfg.seed;
  j["max_outer"] = cfg.max_outer;
  j["zscore"] = cfg.zscore;
  if (cfg.mode == Mode::ssl) {
    j["label_fraction"] = cfg.label_fraction;
    j["repeats"] = cfg.repeats;
    j["label_seed"] = cfg.label_seed;
  }
  return j;
}

json report_to_json(const RunReport& r) {
  json j;
  j["mode"] = r.mode;
  j["config"] = r.config;
  if (r.metrics) {
    j["metrics"] = {{"acc", r.metrics->acc}, {"nmi", r.metrics->nmi}, {"purity", r.metrics->purity}};
  } else {
    j["metrics"] = nullptr;
  }
  j["components"] = r.components;
  j["converged"] = r.converged;
  j["used_fallback"] = r.used_fallback;
  j["alpha"] = r.alpha;
  j["gamma"] = r.gamma;
  j["kernels"] = r.kernels;
  j["weights"] = r.weights;
  j["wall_time"] = r.wall_time;
  json hist = json::array();
  for (const auto& row : r.history) {
    hist.push_back({{"iteration", row.iteration},
                    {"objective", row.objective},
                    {"eig_sum", optional_json(row.eig_sum)},
                    {"gamma", row.gamma},
                    {"components", row.components}});
  }
  j["history"] = hist;
  if (r.mode == "ssl") {
    json per = json::array();
    for (const auto& a : r.accuracy_per_repeat) per.push_back(optional_json(a));
    j["accuracy_per_repeat"] = per;
    j["accuracy_mean"] = optional_json(r.accuracy_mean);
    j["accuracy_std"] = optional_json(r.accuracy_std);
    j["labeled"] = r.labeled;
  }
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.mode = j.at("mode").get<std::string>();
  r.config = j.at("config");
  if (!j.at("metrics").is_null()) {
    const auto& m = j.at("metrics");
    r.metrics = Scores{m.at("acc").get<double>(), m.at("nmi").get<double>(), m.at("purity").get<double>()};
  }
  r.components = j.at("components").get<int>();
  r.converged = j.at("converged").get<bool>();
  r.used_fallback = j.at("used_fallback").get<bool>();
  r.alpha = j.at("alpha").get<double>();
  r.gamma = j.at("gamma").get<double>();
  r.kernels = j.at("kernels").get<std::vector<std::string>>();
  r.weights = j.at("weights").get<std::vector<double>>();
  r.wall_time = j.at("wall_time").get<double>();
  for (const auto& h : j.at("history")) {
    HistoryRow row;
    row.iteration = h.at("iteration").get<int>();
    row.objective = h.at("objective").get<double>();
    row.eig_sum = optional_from<double>(h.at("eig_sum"));
    row.gamma = h.at("gamma").get<double>();
    row.components = h.at("components").get<int>();
    r.history.push_back(row);
  }
  if (r.mode == "ssl") {
    for (const auto& a : j.at("accuracy_per_repeat")) r.accuracy_per_repeat.push_back(optional_from<double>(a));
    r.accuracy_mean = optional_from<double>(j.at("accuracy_mean"));
    r.accuracy_std = optional_from<double>(j.at("accuracy_std"));
    r.labeled = j.at("labeled").get<int>();
  }
  return r;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path.string(), 0);
}

void emit_history(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string(), 0);
  out.precision(17);
  out << "iteration,objective,eig_sum,gamma,components\n";
  for (const auto& row : report.history) {
    out << row.iteration << ',' << row.objective << ',';
    if (row.eig_sum) out << *row.eig_sum;
    out << ',' << row.gamma << ',' << row.components << '\n';
  }
  if (!out) throw FormatError("write failed for " + path.string(), 0);
}

std::vector<HistoryRow> read_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line != "iteration,objective,eig_sum,gamma,components")
    throw FormatError(path.string() + ": unexpected history header", 1);

  std::vector<HistoryRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 5) throw FormatError(path.string() + ": expected 5 fields", lineno);
    try {
      HistoryRow row;
      row.iteration = std::stoi(f[0]);
      row.objective = std::stod(f[1]);
      if (!f[2].empty()) row.eig_sum = std::stod(f[2]);
      row.gamma = std::stod(f[3]);
      row.components = std::stoi(f[4]);
      rows.push_back(row);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": malformed history row", lineno);
    }
  }
  return rows;
}

LabelSet sample_labels(const Labeling& truth, double fraction, std::uint64_t seed) {
  if (!(fraction > 0) || fraction > 1) throw ConfigError("label fraction must lie in (0, 1]");
  int c = 0;
  Labeling ids = detail::compact(truth, &c);
  std::vector<std::vector<Index>> members(c);
  for (std::size_t i = 0; i < ids.size(); ++i) members[ids[i]].push_back(static_cast<Index>(i));

  std::mt19937_64 rng(seed);
  LabelSet out;
  out.c = c;
  for (int k = 0; k < c; ++k) {
    auto& m = members[k];
    std::shuffle(m.begin(), m.end(), rng);
    // Guard against fraction * size landing a hair above an integer.
    const double want = std::ceil(fraction * static_cast<double>(m.size()) - 1e-9);
    const auto take = std::min<std::size_t>(m.size(), static_cast<std::size_t>(want));
    if (take == 0) throw ConfigError("class " + std::to_string(k) + " receives no labeled samples");
    std::vector<Index> chosen(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take));
    std::sort(chosen.begin(), chosen.end());
    for (Index idx : chosen) {
      out.labeled_indices.push_back(idx);
      out.classes.push_back(k);
    }
  }
  return out;
}

Dataset load_run_data(const RunConfig& cfg) {
  Dataset data;
  if (cfg.synth) {
    data = make_synthetic(*cfg.synth);
  } else if (cfg.input) {
    data = load_dataset(*cfg.input, cfg.format, cfg.labels_path);
  } else {
    throw ConfigError("either an input file or a synthetic generator is required");
  }
  if (cfg.zscore) data.X = zscore(data.X);
  return data;
}

RunReport run_cluster(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Dataset data = load_run_data(cfg);
  const Index n = data.X.rows();
  if (cfg.c > n) throw ConfigError("c larger than the number of samples");

  std::vector<KernelSpec> specs = cfg.kernels.empty() ? default_cluster_bank() : cfg.kernels;
  const bool multi = cfg.multi_kernel || specs.size() > 1;
  const Matrix<double> Dx = pairwise_sq_dist(data.X);
  auto bank = build_kernel_bank(data.X, specs);
  const SgskConfig fit = fit_config(cfg);

  RunReport report;
  report.mode = "cluster";
  report.config = config_to_json(cfg);
  report.kernels = kernel_names(specs);

  Labeling labels;
  if (multi) {
    auto res = sgmk_fit<double>(bank, Dx, fit);
    labels = res.labels;
    report.components = res.components;
    report.converged = res.converged;
    report.used_fallback = res.used_fallback;
    report.alpha = res.alpha;
    report.gamma = res.gamma;
    report.weights.assign(res.weights.data(), res.weights.data() + res.weights.size());
    report.history = to_rows(res.history, true);
  } else {
    auto res = sgsk_fit<double>(bank.front().values, Dx, fit);
    labels = res.labels;
    report.components = res.components;
    report.converged = res.converged;
    report.used_fallback = res.used_fallback;
    report.alpha = res.alpha;
    report.gamma = res.gamma;
    report.weights = {1.0};
    report.history = to_rows(res.history, true);
  }

  if (data.truth)
    report.metrics = Scores{clustering_accuracy(labels, *data.truth), nmi(labels, *data.truth),
                            purity(labels, *data.truth)};
  report.wall_time = seconds_since(start);
  return report;
}

RunReport run_ssl(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.repeats < 1) throw ConfigError("repeats must be >= 1");
  Dataset data = load_run_data(cfg);
  if (!data.truth) throw ConfigError("ssl mode needs ground-truth labels");
  const Labeling& truth = *data.truth;

  std::vector<KernelSpec> specs = cfg.kernels.empty() ? default_ssl_bank() : cfg.kernels;
  const Matrix<double> Dx = pairwise_sq_dist(data.X);
  auto bank = build_kernel_bank(data.X, specs);
  SgskConfig fit = fit_config(cfg);

  RunReport report;
  report.mode = "ssl";
  report.config = config_to_json(cfg);
  report.kernels = kernel_names(specs);

  std::vector<double> scored;
  for (int rep = 0; rep < cfg.repeats; ++rep) {
    LabelSet labels = sample_labels(truth, cfg.label_fraction, cfg.label_seed + static_cast<std::uint64_t>(rep));
    if (cfg.c != labels.c) throw ConfigError("c does not match the number of classes in the labels");
    auto res = sgmk_ssl_fit<double>(bank, Dx, labels, fit);

    std::vector<char> is_labeled(truth.size(), 0);
    for (Index idx : labels.labeled_indices) is_labeled[idx] = 1;
    std::size_t hits = 0, total = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (is_labeled[i]) continue;
      ++total;
      hits += res.predicted[i] == truth[i] ? 1 : 0;
    }
    std::optional<double> acc;
    if (total > 0) {
      acc = static_cast<double>(hits) / static_cast<double>(total);
      scored.push_back(*acc);
    }
    report.accuracy_per_repeat.push_back(acc);

    if (rep == 0) {
      report.labeled = static_cast<int>(labels.labeled_indices.size());
      report.components = connected_components(res.Z, fit.eps_rank).count;
      report.converged = res.converged;
      report.alpha = res.alpha;
      report.gamma = res.gamma;
      report.weights.assign(res.weights.data(), res.weights.data() + res.weights.size());
      report.history = to_rows(res.history, false);
    }
  }

  if (!scored.empty()) {
    const double mean = std::accumulate(scored.begin(), scored.end(), 0.0) / static_cast<double>(scored.size());
    double var = 0;
    for (double a : scored) var += (a - mean) * (a - mean);
    report.accuracy_mean = mean;
    report.accuracy_std = std::sqrt(var / static_cast<double>(scored.size()));
  }
  report.wall_time = seconds_since(start);
  return report;
}

}  // namespace sgl
