#pragma once

// Experiment orchestration behind the `sgl` command line tool.

#include "sgl/graph.hpp"
#include "sgl/io.hpp"
#include "sgl/kernel_bank.hpp"
#include "sgl/ssl.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sgl {

enum class Mode { cluster, ssl };

struct RunConfig {
  Mode mode = Mode::cluster;
  std::optional<std::filesystem::path> input;
  DataFormat format = DataFormat::csv;
  std::optional<std::filesystem::path> labels_path;
  /// Generate the data instead of reading `input`.
  std::optional<SynthOptions> synth;

  /// Empty selects the default bank of the mode.
  std::vector<KernelSpec> kernels;
  bool multi_kernel = false;

  int c = 2;
  int k = 5;
  std::optional<double> gamma0;
  bool gamma_adapt = true;
  std::uint64_t seed = 42;
  int max_outer = 50;
  bool zscore = false;

  double label_fraction = 0.1;
  int repeats = 1;
  std::uint64_t label_seed = 7;

  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> history;
};

struct Scores {
  double acc = 0;
  double nmi = 0;
  double purity = 0;
  bool operator==(const Scores&) const = default;
};

struct HistoryRow {
  int iteration = 0;
  double objective = 0;
  /// Sum of the c smallest Laplacian eigenvalues; absent in ssl mode.
  std::optional<double> eig_sum;
  double gamma = 0;
  int components = 0;
  bool operator==(const HistoryRow&) const = default;
};

struct RunReport {
  std::string mode;
  nlohmann::json config;
  std::optional<Scores> metrics;
  int components = 0;
  bool converged = false;
  bool used_fallback = false;
  double alpha = 0;
  double gamma = 0;
  std::vector<std::string> kernels;
  std::vector<double> weights;
  double wall_time = 0;
  std::vector<HistoryRow> history;

  // ssl mode: accuracy on unlabeled samples, one entry per repeat; absent
  // when every sample is labeled.
  std::vector<std::optional<double>> accuracy_per_repeat;
  std::optional<double> accuracy_mean;
  std::optional<double> accuracy_std;
  int labeled = 0;

  bool operator==(const RunReport&) const = default;
};

nlohmann::json config_to_json(const RunConfig& cfg);
nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

void write_report(const RunReport& report, const std::filesystem::path& path);

/// Flat CSV: iteration,objective,eig_sum,gamma,components.
void emit_history(const RunReport& report, const std::filesystem::path& path);
std::vector<HistoryRow> read_history(const std::filesystem::path& path);

/// Stratified sample: ceil(fraction * n_class) labeled samples per class.
LabelSet sample_labels(const Labeling& truth, double fraction, std::uint64_t seed);

Dataset load_run_data(const RunConfig& cfg);

RunReport run_cluster(const RunConfig& cfg);
RunReport run_ssl(const RunConfig& cfg);

}  // namespace sgl
