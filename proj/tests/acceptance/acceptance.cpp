// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include "oracles.hpp"
#include "sgl/io.hpp"
#include "sgl/multi_kernel.hpp"
#include "sgl/run.hpp"
#include "sgl/ssl.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Kernel = sgl::KernelMatrix<double>;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

Mat gaussian_features(int n, int m, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat X(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) X(i, j) = g(rng);
  return X;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

// 1
Outcome qp_oracle() {
  Outcome out;
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> size(1, 6);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = size(rng);
    Mat B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    Mat A = B * B.transpose() + 0.1 * Mat::Identity(n, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) b(i) = 3.0 * g(rng);
    sgl::QpOptions<double> opts;
    opts.tol = 1e-10;
    opts.max_iter = 20000;
    Vec z = sgl::solve_column_qp<double>({A, b}, opts).z;
    const double err = (z - sgl::oracle::simplex_qp_enumerate(A, b)).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
  }
  out.require(worst <= 1e-6, "max deviation " + fmt(worst));
  if (out.ok) out.detail = "max deviation " + fmt(worst);
  return out;
}

// 2
Outcome exact_k() {
  Outcome out;
  std::mt19937 rng(202);
  int instances = 0;
  for (int k : {3, 5, 10}) {
    for (int trial = 0; trial < 34 && instances < 100; ++trial, ++instances) {
      Mat D = sgl::pairwise_sq_dist<double>(gaussian_features(50, 3, rng));
      auto est = sgl::estimate_alpha(D, k);
      for (int i = 0; i < 50; ++i) {
        Vec d(49);
        for (int j = 0, q = 0; j < 50; ++j)
          if (j != i) d(q++) = D(i, j);
        Vec z = sgl::project_simplex<double>(-d / (2.0 * est.per_point(i)));
        const auto nnz = (z.array() > 1e-12 * z.maxCoeff()).count();
        out.require(nnz == k, "column with " + std::to_string(nnz) + " nonzeros for k=" + std::to_string(k));
      }
    }
  }
  if (out.ok) out.detail = std::to_string(instances) + " instances";
  return out;
}

// 3
Outcome monotone_descent() {
  Outcome out;
  int iterations = 0;
  for (unsigned seed = 0; seed < 20; ++seed) {
    std::mt19937 rng(300 + seed);
    Mat X = gaussian_features(100, 4, rng);
    Mat D = sgl::pairwise_sq_dist<double>(X);
    Mat K = sgl::normalize_kernel(sgl::gaussian_kernel<double>(X, 1.0)).values;
    sgl::SgskConfig cfg;
    cfg.c = 3;
    cfg.k = 8;
    cfg.gamma_adapt = false;
    cfg.max_outer = 20;
    cfg.seed = seed;
    auto res = sgl::sgsk_fit<double>(K, D, cfg);
    for (std::size_t i = 1; i < res.history.size(); ++i) {
      const double prev = res.history[i - 1].objective, cur = res.history[i].objective;
      out.require(cur <= prev + 1e-8 * std::abs(prev), "increase at seed " + std::to_string(seed));
    }
    iterations += static_cast<int>(res.history.size());
  }
  if (out.ok) out.detail = std::to_string(iterations) + " recorded iterations";
  return out;
}

struct SuiteRun {
  std::string name;
  sgl::RunReport report;
};

std::vector<SuiteRun>& synthetic_suite() {
  static std::vector<SuiteRun> runs = [] {
    std::vector<SuiteRun> out;
    auto add = [&](std::string name, sgl::SynthKind kind, int n, int classes, int k, std::vector<sgl::KernelSpec> kernels,
                   std::uint64_t seed) {
      sgl::RunConfig cfg;
      sgl::SynthOptions so;
      so.kind = kind;
      so.n = n;
      so.classes = classes;
      so.seed = seed;
      cfg.synth = so;
      cfg.c = kind == sgl::SynthKind::blobs ? classes : 2;
      cfg.k = k;
      cfg.kernels = std::move(kernels);
      out.push_back({std::move(name), sgl::run_cluster(cfg)});
    };
    add("blobs", sgl::SynthKind::blobs, 90, 3, 9, {sgl::KernelSpec::linear()}, 1);
    add("rings", sgl::SynthKind::rings, 200, 2, 10, {}, 1);
    for (std::uint64_t seed = 2; seed < 6; ++seed) {
      add("blobs", sgl::SynthKind::blobs, 60, 2 + static_cast<int>(seed % 3), 7, {sgl::KernelSpec::gaussian(1.0)}, seed);
      add("moons", sgl::SynthKind::moons, 100, 2, 8, {sgl::KernelSpec::gaussian(0.1)}, seed);
    }
    return out;
  }();
  return runs;
}

// 4
Outcome rank_components() {
  Outcome out;
  int checked = 0;
  for (const auto& run : synthetic_suite()) {
    const auto& r = run.report;
    if (!r.converged) continue;
    const auto& last = r.history.back();
    const int c = r.config.at("c").get<int>();
    if (last.eig_sum && *last.eig_sum < 1e-8) {
      ++checked;
      out.require(r.components == c, run.name + " has " + std::to_string(r.components) + " components");
    }
  }
  out.require(checked > 0, "no converged run");
  if (out.ok) out.detail = std::to_string(checked) + "/" + std::to_string(synthetic_suite().size()) + " runs checked";
  return out;
}

// 5
Outcome end_to_end_clustering() {
  Outcome out;
  const auto& blobs = synthetic_suite()[0].report;
  const auto& rings = synthetic_suite()[1].report;
  out.require(blobs.metrics && blobs.metrics->acc == 1.0, "blobs acc " + fmt(blobs.metrics->acc));
  out.require(blobs.metrics->nmi > 1 - 1e-12, "blobs nmi " + fmt(blobs.metrics->nmi));
  out.require(blobs.components == 3, "blobs components " + std::to_string(blobs.components));
  out.require(blobs.wall_time < 10, "blobs took " + fmt(blobs.wall_time) + " s");
  out.require(rings.metrics && rings.metrics->acc >= 0.95, "rings acc " + fmt(rings.metrics->acc));
  out.require(rings.wall_time < 60, "rings took " + fmt(rings.wall_time) + " s");
  if (out.ok)
    out.detail = "blobs acc " + fmt(blobs.metrics->acc) + " in " + fmt(blobs.wall_time) + " s, rings acc " +
                 fmt(rings.metrics->acc) + " in " + fmt(rings.wall_time) + " s";
  return out;
}

// 6
Outcome weight_kkt() {
  Outcome out;
  Vec h2(2);
  h2 << 1, 1;
  Vec w = sgl::update_weights<double>(h2);
  out.require(w(0) == 0.25 && w(1) == 0.25, "h=[1,1] gave " + fmt(w(0)) + "," + fmt(w(1)));
  h2 << 1, 3;
  w = sgl::update_weights<double>(h2);
  out.require(w(0) == 9.0 / 16 && w(1) == 1.0 / 16, "h=[1,3] gave " + fmt(w(0)) + "," + fmt(w(1)));

  std::mt19937 rng(606);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  double worst = -1;
  for (int r = 1; r <= 4; ++r) {
    for (int trial = 0; trial < (r == 4 ? 3 : 10); ++trial) {
      Vec h(r);
      for (int i = 0; i < r; ++i) h(i) = u(rng);
      const double gap = sgl::update_weights<double>(h).dot(h) - sgl::oracle::weight_grid_min(h, 1e-3);
      worst = std::max(worst, gap);
    }
  }
  out.require(worst <= 1e-6, "exceeds grid by " + fmt(worst));
  if (out.ok) out.detail = "worst gap to grid " + fmt(worst);
  return out;
}

// 7
Outcome harmonic_ssl() {
  Outcome out;
  // Three disjoint random components, one or two labels each.
  std::mt19937 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int per = 8, c = 3, n = per * c;
    Mat W = Mat::Zero(n, n);
    for (int b = 0; b < c; ++b)
      for (int i = 0; i < per; ++i)
        for (int j = 0; j < per; ++j)
          if (i != j && (u(rng) < 0.4 || j == i + 1)) W(b * per + i, b * per + j) = u(rng) + 0.01;
    Mat L = sgl::build_laplacian<double>(W).L;
    std::vector<int> cls = {2, 0, 1};
    sgl::LabelSet labels;
    labels.c = c;
    for (int b = 0; b < c; ++b) {
      labels.labeled_indices.push_back(b * per + trial % per);
      labels.classes.push_back(cls[b]);
      if (trial % 2) {
        labels.labeled_indices.push_back(b * per + (trial + 3) % per);
        labels.classes.push_back(cls[b]);
      }
    }
    Mat P = sgl::harmonic_labels(L, labels);
    auto pred = sgl::decide_labels<double>(P);
    Mat LP = L * P;
    std::vector<bool> labeled(n, false);
    for (auto i : labels.labeled_indices) labeled[i] = true;
    for (int i = 0; i < n; ++i) {
      out.require(pred[i] == cls[i / per], "wrong class at sample " + std::to_string(i));
      if (!labeled[i]) out.require(LP.row(i).cwiseAbs().maxCoeff() <= 1e-6, "(LP)_u too large");
    }
  }

  sgl::RunConfig cfg;
  cfg.mode = sgl::Mode::ssl;
  sgl::SynthOptions so;
  so.n = 100;
  so.classes = 2;
  cfg.synth = so;
  cfg.c = 2;
  cfg.k = 9;
  cfg.label_fraction = 0.1;
  cfg.repeats = 20;
  auto report = sgl::run_ssl(cfg);
  out.require(report.accuracy_mean && *report.accuracy_mean == 1.0, "mean accuracy " + fmt(*report.accuracy_mean));
  out.require(report.accuracy_std && *report.accuracy_std == 0.0, "std " + fmt(*report.accuracy_std));
  if (out.ok) out.detail = "20 repeats, mean 1, std 0";
  return out;
}

// 8
Outcome block_uniform_optimal() {
  Outcome out;
  std::mt19937 rng(808);
  std::normal_distribution<double> g(0.0, 0.1);
  const int n = 8;
  Mat X(n, 2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = (i < 4 ? -2.0 : 2.0) + g(rng);
    X(i, 1) = g(rng);
  }
  Mat K = sgl::normalize_kernel(sgl::gaussian_kernel<double>(X, 1.0)).values;
  const Mat zero = Mat::Zero(n, n);
  const Mat P = Mat::Zero(n, 2);
  const double alpha = 1e6;
  Mat Zu = Mat::Zero(n, n);
  Zu.topLeftCorner(4, 4).setConstant(0.25);
  Zu.bottomRightCorner(4, 4).setConstant(0.25);
  const double best = sgl::objective_value<double>(K, zero, Zu, P, alpha, 0.0);

  std::uniform_real_distribution<double> u(0.0, 1.0), t_dist(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Mat R = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const int base = j < 4 ? 0 : 4;
      for (int i = 0; i < 4; ++i) R(base + i, j) = u(rng);
      R.col(j) /= R.col(j).sum();
    }
    const double t = t_dist(rng);
    Mat Zp = (1 - t) * Zu + t * R;
    const double value = sgl::objective_value<double>(K, zero, Zp, P, alpha, 0.0);
    out.require(value > best, "perturbation " + std::to_string(trial) + " not worse");
  }
  if (out.ok) out.detail = "200 perturbations all worse";
  return out;
}

// 9
Outcome metrics() {
  Outcome out;
  out.require(sgl::clustering_accuracy({0, 0, 1, 1}, {0, 1, 1, 1}) == 0.75, "hand accuracy");
  out.require(sgl::purity({0, 0, 0, 0}, {0, 0, 1, 1}) == 0.5, "hand purity");
  out.require(std::abs(sgl::nmi({0, 0, 1, 1}, {0, 1, 0, 1})) <= 1e-12, "independent nmi");
  out.require(std::abs(sgl::nmi({0, 0, 1, 1}, {1, 1, 0, 0}) - 1) <= 1e-12, "identical nmi");

  std::mt19937 rng(909);
  std::uniform_int_distribution<int> kd(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const int kp = kd(rng), kt = kd(rng), n = 20 + trial % 15;
    std::uniform_int_distribution<int> lp(0, kp - 1), lt(0, kt - 1);
    sgl::Labeling pred(n), truth(n);
    for (int i = 0; i < n; ++i) {
      pred[i] = lp(rng);
      truth[i] = lt(rng);
    }
    const double acc = sgl::clustering_accuracy(pred, truth);
    out.require(std::abs(acc - sgl::oracle::accuracy_exhaustive(pred, truth)) <= 1e-12, "accuracy vs exhaustive");
    std::vector<int> perm(kp);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    sgl::Labeling permuted(n);
    for (int i = 0; i < n; ++i) permuted[i] = perm[pred[i]];
    out.require(std::abs(sgl::clustering_accuracy(permuted, truth) - acc) <= 1e-12, "accuracy permutation");
    out.require(std::abs(sgl::nmi(permuted, truth) - sgl::nmi(pred, truth)) <= 1e-12, "nmi permutation");
    out.require(std::abs(sgl::purity(permuted, truth) - sgl::purity(pred, truth)) <= 1e-12, "purity permutation");
  }
  if (out.ok) out.detail = "200 random cases";
  return out;
}

// 10
Outcome numerical_identities() {
  Outcome out;
  std::mt19937 rng(1010);
  double worst_centering = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10 + trial;
    Mat X = gaussian_features(n, 3, rng);
    Mat H = Mat::Identity(n, n) - Mat::Constant(n, n, 1.0 / n);
    Mat D = sgl::pairwise_sq_dist<double>(X);
    Mat lhs = H * D * H, rhs = -2.0 * H * X * X.transpose() * H;
    worst_centering = std::max(worst_centering, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  out.require(worst_centering <= 1e-8, "centering identity off by " + fmt(worst_centering));

  // Drive the alternation by hand to see the embedding at every step.
  double worst_trace = 0;
  Mat X = gaussian_features(60, 3, rng);
  Mat D = sgl::pairwise_sq_dist<double>(X);
  Mat K = sgl::normalize_kernel(sgl::gaussian_kernel<double>(X, 1.0)).values;
  sgl::SgskConfig cfg;
  cfg.c = 3;
  cfg.k = 6;
  const double alpha = sgl::estimate_alpha(D, cfg.k).alpha;
  Mat Z = Mat::Constant(60, 60, 1.0 / 60);
  auto emb = sgl::smallest_eigpairs<double>(sgl::build_laplacian<double>(Z).L, cfg.c);
  for (int it = 0; it < 15; ++it) {
    Z = sgl::update_graph<double>(K, D, emb.P, alpha, alpha, Z, cfg);
    Mat L = sgl::build_laplacian<double>(Z).L;
    emb = sgl::smallest_eigpairs<double>(L, cfg.c);
    const double gap = std::abs((emb.P.transpose() * L * emb.P).trace() - emb.eigenvalues.sum());
    worst_trace = std::max(worst_trace, gap);
  }
  out.require(worst_trace <= 1e-8, "trace identity off by " + fmt(worst_trace));
  if (out.ok) out.detail = "centering " + fmt(worst_centering) + ", trace " + fmt(worst_trace);
  return out;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"simplex QP matches support enumeration", 30, qp_oracle},
      {"per-point alpha gives exactly k neighbors", 10, exact_k},
      {"objective descends with fixed gamma", 60, monotone_descent},
      {"zero eigenvalue sum implies c components", 120, rank_components},
      {"synthetic end-to-end clustering", 70, end_to_end_clustering},
      {"kernel weights match grid search", 20, weight_kkt},
      {"harmonic label propagation", 30, harmonic_ssl},
      {"block-uniform graph beats perturbations", 10, block_uniform_optimal},
      {"metrics and label permutation invariance", 10, metrics},
      {"centering and trace identities", 30, numerical_identities},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = c.check();
    } catch (const std::exception& e) {
      res.ok = false;
      res.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (res.ok && secs > c.budget_seconds) {
      res.ok = false;
      res.detail = "over time budget of " + fmt(c.budget_seconds) + " s";
    }
    failures += res.ok ? 0 : 1;
    std::printf("%s [%zu] %s (%.2f s): %s\n", res.ok ? "PASS" : "FAIL", i + 1, c.name, secs, res.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
