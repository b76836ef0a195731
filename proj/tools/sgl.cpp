// sgl: structured graph learning from the command line.
//
//   sgl cluster --input data.csv --c 3 --k 9 --out report.json
//   sgl ssl --input data.csv --c 3 --k 9 --label-fraction 0.1 --repeats 20 --out report.json
//   sgl synth --kind blobs --n 150 --seed 1 --out data.csv
//
// Exit codes: 0 success, 2 configuration or input error, 3 numerical error.

#include "sgl/io.hpp"
#include "sgl/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

struct Options {
  sgl::RunConfig run;
  std::string input;
  std::string format = "csv";
  std::string labels;
  std::string kernels;
  std::string synth_kind;
  int synth_n = 150;
  std::uint64_t synth_seed = 1;
  int synth_classes = 3;
  double synth_noise = -1;
  std::string out;
  std::string history;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "Dataset file");
  cmd->add_option("--format", o.format, "Input format: csv or dense")->check(CLI::IsMember({"csv", "dense"}));
  cmd->add_option("--labels", o.labels, "Sidecar label file (dense format)");
  cmd->add_option("--synth", o.synth_kind, "Use a synthetic dataset instead of --input: blobs, rings, moons");
  cmd->add_option("--synth-n", o.synth_n, "Synthetic sample count");
  cmd->add_option("--synth-seed", o.synth_seed, "Synthetic generator seed");
  cmd->add_option("--synth-classes", o.synth_classes, "Synthetic blob count");
  cmd->add_option("--synth-noise", o.synth_noise, "Synthetic noise level (negative: default)");
  cmd->add_option("--kernels", o.kernels, "Comma separated kernels, e.g. gaussian:1,linear,poly:1:2");
  cmd->add_option("--c", o.run.c, "Number of clusters / classes")->required();
  cmd->add_option("--k", o.run.k, "Neighborhood size used to set alpha")->required();
  cmd->add_option("--gamma0", o.run.gamma0, "Initial rank penalty weight (default: alpha)");
  cmd->add_option("--seed", o.run.seed, "Seed for the graph initialization");
  cmd->add_option("--max-outer", o.run.max_outer, "Outer iteration cap");
  cmd->add_flag("--zscore", o.run.zscore, "Standardize every feature");
  cmd->add_option("--out", o.out, "JSON report path (default: stdout)");
  cmd->add_option("--history", o.history, "Per-iteration history CSV path");
}

void finalize(Options& o) {
  if (!o.input.empty()) o.run.input = o.input;
  o.run.format = sgl::parse_format(o.format);
  if (!o.labels.empty()) o.run.labels_path = o.labels;
  if (!o.kernels.empty()) o.run.kernels = sgl::parse_kernel_list(o.kernels);
  if (!o.synth_kind.empty()) {
    sgl::SynthOptions s;
    s.kind = sgl::parse_synth_kind(o.synth_kind);
    s.n = o.synth_n;
    s.seed = o.synth_seed;
    s.classes = o.synth_classes;
    s.noise = o.synth_noise;
    o.run.synth = s;
  }
  if (!o.out.empty()) o.run.out = o.out;
  if (!o.history.empty()) o.run.history = o.history;
}

void publish(const sgl::RunReport& report, const Options& o) {
  if (o.run.out) {
    sgl::write_report(report, *o.run.out);
  } else {
    std::cout << sgl::report_to_json(report).dump(2) << '\n';
  }
  if (o.run.history) sgl::emit_history(report, *o.run.history);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured graph learning for clustering and semi-supervised classification"};
  app.require_subcommand(1);

  Options cluster_opts;
  auto* cluster = app.add_subcommand("cluster", "Learn a graph and cluster the samples");
  add_common(cluster, cluster_opts);
  cluster->add_flag("--multi-kernel", cluster_opts.run.multi_kernel, "Learn kernel weights over the bank");
  bool no_adapt = false;
  cluster->add_flag("--no-gamma-adapt", no_adapt, "Keep gamma fixed");

  Options ssl_opts;
  ssl_opts.run.mode = sgl::Mode::ssl;
  auto* ssl = app.add_subcommand("ssl", "Semi-supervised classification with sampled labels");
  add_common(ssl, ssl_opts);
  ssl->add_option("--label-fraction", ssl_opts.run.label_fraction, "Labeled share of every class");
  ssl->add_option("--repeats", ssl_opts.run.repeats, "Independent label draws");
  ssl->add_option("--label-seed", ssl_opts.run.label_seed, "Seed of the first label draw");

  sgl::SynthOptions synth_opts;
  std::string synth_kind = "blobs";
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--kind", synth_kind, "blobs, rings or moons")->check(CLI::IsMember({"blobs", "rings", "moons"}));
  synth->add_option("--n", synth_opts.n, "Sample count");
  synth->add_option("--seed", synth_opts.seed, "Generator seed");
  synth->add_option("--classes", synth_opts.classes, "Blob count");
  synth->add_option("--noise", synth_opts.noise, "Noise level (negative: default)");
  synth->add_option("--separation", synth_opts.separation, "Distance between neighboring blob centers");
  synth->add_option("--out", synth_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*cluster) {
      finalize(cluster_opts);
      cluster_opts.run.gamma_adapt = !no_adapt;
      publish(sgl::run_cluster(cluster_opts.run), cluster_opts);
    } else if (*ssl) {
      finalize(ssl_opts);
      ssl_opts.run.gamma_adapt = false;
      publish(sgl::run_ssl(ssl_opts.run), ssl_opts);
    } else if (*synth) {
      synth_opts.kind = sgl::parse_synth_kind(synth_kind);
      sgl::write_csv(sgl::make_synthetic(synth_opts), synth_out);
    }
  } catch (const sgl::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const sgl::DegenerateDataError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const sgl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  }
  return 0;
}
