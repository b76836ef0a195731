#pragma once

// Structured graph learning with a single kernel.
//
// Learns a column-stochastic affinity matrix Z minimizing
//
//   Tr(K - 2KZ + Z'KZ) + Tr(Z'Dx) + alpha ||Z||_F^2 + gamma Tr(P'LP)
//
// where L is the Laplacian of (Z + Z')/2 and P spans its c smallest
// eigenvectors. Z and P are updated alternately.

#include "sgl/kernel_bank.hpp"
#include "sgl/metrics.hpp"
#include "sgl/simplex_qp.hpp"
#include "sgl/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace sgl {

struct SgskConfig {
  int c = 2;
  int k = 5;
  /// Initial gamma; unset means gamma0 = alpha.
  std::optional<double> gamma0;
  bool gamma_adapt = true;
  double eps_rank = 1e-8;
  double outer_tol = 1e-6;
  int max_outer = 50;
  std::uint64_t seed = 0;
  /// Weight on the Tr(Z'Dx) term.
  double local_weight = 1.0;
  /// Per-column QP settings.
  double qp_tol = 1e-7;
  int qp_max_iter = 2000;
};

template <Real Scalar>
struct AlphaEstimate {
  Scalar alpha = 0;
  Vector<Scalar> per_point;
};

template <Real Scalar>
struct GraphLaplacian {
  Matrix<Scalar> L;
  Vector<Scalar> degree;
};

template <Real Scalar>
struct SpectralEmbedding {
  Matrix<Scalar> P;
  /// Ascending.
  Vector<Scalar> eigenvalues;
};

struct IterationRecord {
  double objective = 0;
  double eig_sum = 0;
  double gamma = 0;
  int components = 0;
  /// Column QPs that hit the iteration cap during this iteration.
  int truncated_columns = 0;
};

template <Real Scalar>
struct SgskResult {
  Matrix<Scalar> Z;
  SpectralEmbedding<Scalar> embedding;
  Labeling labels;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool used_fallback = false;
  int components = 0;
  Scalar alpha = 0;
  Scalar gamma = 0;
};

inline constexpr double kAlphaFloor = 1e-12;

/// Per-point regularization that yields exactly k neighbors:
/// alpha_i = k/2 d_(k+1) - 1/2 sum_{j<=k} d_(j) over sorted distances to the
/// other samples; alpha is their mean. Non-positive values are floored.
template <Real Scalar>
AlphaEstimate<Scalar> estimate_alpha(const Matrix<Scalar>& Dx, int k) {
  const Index n = Dx.rows();
  if (k < 1 || k > n - 2) throw ConfigError("neighborhood size k must satisfy 1 <= k <= n-2");

  AlphaEstimate<Scalar> out;
  out.per_point.resize(n);
  std::vector<Scalar> row;
  row.reserve(n - 1);
  for (Index i = 0; i < n; ++i) {
    row.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) row.push_back(Dx(i, j));
    std::partial_sort(row.begin(), row.begin() + k + 1, row.end());
    Scalar head = 0;
    for (int j = 0; j < k; ++j) head += row[j];
    Scalar a = Scalar(k) / Scalar(2) * row[k] - head / Scalar(2);
    out.per_point(i) = std::max(a, Scalar(kAlphaFloor));
  }
  out.alpha = out.per_point.mean();
  return out;
}

/// L = D - W with W = (Z + Z')/2 and D the row sums of W.
template <Real Scalar>
GraphLaplacian<Scalar> build_laplacian(const Matrix<Scalar>& Z) {
  Matrix<Scalar> W = (Z + Z.transpose()) / Scalar(2);
  GraphLaplacian<Scalar> out;
  out.degree = W.rowwise().sum();
  out.L = -W;
  out.L.diagonal() += out.degree;
  return out;
}

/// The `count` smallest eigenpairs of a symmetric matrix, ascending.
template <Real Scalar>
SpectralEmbedding<Scalar> smallest_eigpairs(const Matrix<Scalar>& L, int count) {
  if (count < 1 || count > L.rows()) throw ConfigError("eigenpair count out of range");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(L);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  return {solver.eigenvectors().leftCols(count), solver.eigenvalues().head(count)};
}

namespace detail {

template <Real Scalar>
Matrix<Scalar> row_sq_dist(const Matrix<Scalar>& P) {
  const Vector<Scalar> norms = P.rowwise().squaredNorm();
  Matrix<Scalar> D = (-Scalar(2) * P * P.transpose()).colwise() + norms;
  D.rowwise() += norms.transpose();
  D = D.cwiseMax(Scalar(0));
  D.diagonal().setZero();
  return D;
}

/// Tr(K - 2KZ + Z'KZ).
template <Real Scalar>
Scalar self_expression_residual(const Matrix<Scalar>& K, const Matrix<Scalar>& Z) {
  const Scalar cross = (K.transpose().array() * Z.array()).sum();
  const Scalar quad = (Z.array() * (K * Z).array()).sum();
  return K.trace() - Scalar(2) * cross + quad;
}

}  // namespace detail

struct GraphUpdateStats {
  int truncated_columns = 0;
  double max_kkt_residual = 0;
};

/// Re-solves every column of Z for fixed P:
///   min_z z'(alpha I + K)z + (w_local d_i^x + gamma/2 d_i^p - 2 K_i)'z
/// on the simplex, warm started from `warm` when given.
template <Real Scalar>
Matrix<Scalar> update_graph(const Matrix<Scalar>& K, const Matrix<Scalar>& Dx, const Matrix<Scalar>& P,
                            Scalar alpha, Scalar gamma, const std::optional<Matrix<Scalar>>& warm = std::nullopt,
                            const SgskConfig& cfg = {}, GraphUpdateStats* stats = nullptr) {
  const Index n = K.rows();
  if (K.cols() != n || Dx.rows() != n || Dx.cols() != n || P.rows() != n)
    throw InputError("update_graph: inconsistent dimensions");
  if (!(alpha > 0)) throw ConfigError("alpha must be positive");
  if (!(gamma >= 0)) throw ConfigError("gamma must be nonnegative");

  Matrix<Scalar> A = K;
  A.diagonal().array() += alpha;
  const Matrix<Scalar> Dp = detail::row_sq_dist(P);
  const Matrix<Scalar> linear =
      Scalar(cfg.local_weight) * Dx + (gamma / Scalar(2)) * Dp - Scalar(2) * K;

  QpOptions<Scalar> opts;
  opts.tol = Scalar(cfg.qp_tol);
  opts.max_iter = cfg.qp_max_iter;
  opts.lambda_max = gershgorin_bound(A);

  Matrix<Scalar> Z(n, n);
  GraphUpdateStats local;
  for (Index i = 0; i < n; ++i) {
    const Vector<Scalar> b = linear.col(i);
    std::optional<Vector<Scalar>> start;
    if (warm) start = Vector<Scalar>(warm->col(i));
    auto sol = solve_column_qp<Scalar>({A, b}, opts, start);
    Z.col(i) = sol.z;
    local.truncated_columns += sol.truncated ? 1 : 0;
    local.max_kkt_residual = std::max(local.max_kkt_residual, static_cast<double>(sol.kkt_residual));
  }
  if (stats) *stats = local;
  return Z;
}

/// Full objective including the spectral penalty gamma Tr(P'LP).
template <Real Scalar>
Scalar objective_value(const Matrix<Scalar>& K, const Matrix<Scalar>& Dx, const Matrix<Scalar>& Z,
                       const Matrix<Scalar>& P, Scalar alpha, Scalar gamma, Scalar local_weight = 1) {
  const Scalar local = (Z.array() * Dx.array()).sum();
  Scalar value = detail::self_expression_residual(K, Z) + local_weight * local + alpha * Z.squaredNorm();
  if (gamma != 0) {
    const auto lap = build_laplacian(Z);
    value += gamma * (P.transpose() * lap.L * P).trace();
  }
  return value;
}

/// Doubles gamma when fewer than c of the leading c+1 eigenvalues are zero,
/// halves it when more are, keeps it otherwise.
template <Real Scalar>
Scalar adapt_gamma(const Vector<Scalar>& eigenvalues, int c, Scalar gamma, Scalar eps_rank) {
  const Index m = std::min<Index>(eigenvalues.size(), c + 1);
  int zeros = 0;
  for (Index i = 0; i < m; ++i)
    if (eigenvalues(i) <= eps_rank) ++zeros;
  if (zeros < c) return Scalar(2) * gamma;
  if (zeros > c) return gamma / Scalar(2);
  return gamma;
}

namespace detail {

inline void validate_config(const SgskConfig& cfg, Index n) {
  if (cfg.c < 2 || cfg.c >= n) throw ConfigError("cluster count c must satisfy 2 <= c < n");
  if (cfg.k < 1 || cfg.k > n - 2) throw ConfigError("neighborhood size k must satisfy 1 <= k <= n-2");
  if (cfg.gamma0 && !(*cfg.gamma0 > 0)) throw ConfigError("gamma0 must be positive");
  if (!(cfg.eps_rank > 0) || !(cfg.outer_tol > 0)) throw ConfigError("tolerances must be positive");
  if (cfg.max_outer < 1) throw ConfigError("max_outer must be >= 1");
  if (!(cfg.local_weight >= 0)) throw ConfigError("local_weight must be nonnegative");
}

/// Each column i.i.d. uniform, projected onto the simplex.
template <Real Scalar>
Matrix<Scalar> random_stochastic(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix<Scalar> Z(n, n);
  for (Index j = 0; j < n; ++j) {
    Vector<Scalar> v(n);
    for (Index i = 0; i < n; ++i) v(i) = static_cast<Scalar>(unif(rng));
    Z.col(j) = project_simplex<Scalar>(v);
  }
  return Z;
}

/// Result of the P step: the embedding, its eigenvalues when it comes from
/// the Laplacian spectrum, and the penalty Tr(P'LP).
template <Real Scalar>
struct EmbeddingStep {
  Matrix<Scalar> P;
  Vector<Scalar> eigenvalues;
  Scalar penalty = 0;
};

/// P as the c smallest Laplacian eigenvectors. Keeps c+1 eigenvalues for
/// the gamma schedule.
template <Real Scalar>
struct SpectralStep {
  int c;
  static constexpr bool rank_constrained = true;

  EmbeddingStep<Scalar> operator()(const Matrix<Scalar>& Z) const {
    auto lap = build_laplacian(Z);
    auto eig = smallest_eigpairs(lap.L, c + 1);
    EmbeddingStep<Scalar> out;
    out.P = eig.P.leftCols(c);
    out.eigenvalues = eig.eigenvalues;
    out.penalty = eig.eigenvalues.head(c).sum();
    return out;
  }
};

/// A kernel that stays fixed during the fit.
template <Real Scalar>
struct FixedKernel {
  const Matrix<Scalar>& K;
  const Matrix<Scalar>& current() const { return K; }
  void update(const Matrix<Scalar>&) {}
};

template <Real Scalar>
struct FitState {
  Matrix<Scalar> Z;
  EmbeddingStep<Scalar> embedding;
  std::vector<IterationRecord> history;
  bool converged = false;
  Scalar alpha = 0;
  Scalar gamma = 0;
};

/// Alternates the P step, the Z step and the kernel update. The recorded
/// objective is evaluated at the new Z, the refreshed kernel and the P that
/// is optimal for the new Z, so with gamma fixed it never increases.
template <Real Scalar, class KernelPolicy, class EmbedPolicy>
FitState<Scalar> alternate(KernelPolicy& kernel, const EmbedPolicy& embed, const Matrix<Scalar>& Dx,
                           const SgskConfig& cfg, Scalar alpha, Scalar gamma, bool adapt) {
  const Index n = Dx.rows();
  const Scalar lw = Scalar(cfg.local_weight);
  const Scalar eps = Scalar(cfg.eps_rank);

  FitState<Scalar> st;
  st.alpha = alpha;
  st.Z = random_stochastic<Scalar>(n, cfg.seed);
  st.embedding = embed(st.Z);

  auto evaluate = [&]() {
    const Matrix<Scalar>& K = kernel.current();
    return detail::self_expression_residual(K, st.Z) + lw * (st.Z.array() * Dx.array()).sum() +
           alpha * st.Z.squaredNorm() + gamma * st.embedding.penalty;
  };

  Scalar previous = evaluate();
  bool gamma_changed = false;
  for (int it = 0; it < cfg.max_outer; ++it) {
    GraphUpdateStats stats;
    st.Z = update_graph<Scalar>(kernel.current(), Dx, st.embedding.P, alpha, gamma, st.Z, cfg, &stats);
    kernel.update(st.Z);
    st.embedding = embed(st.Z);

    const Scalar value = evaluate();
    IterationRecord rec;
    rec.objective = static_cast<double>(value);
    rec.gamma = static_cast<double>(gamma);
    rec.components = connected_components(st.Z, cfg.eps_rank).count;
    rec.truncated_columns = stats.truncated_columns;
    if constexpr (EmbedPolicy::rank_constrained) {
      rec.eig_sum = static_cast<double>(st.embedding.eigenvalues.head(embed.c).sum());
    } else {
      rec.eig_sum = std::numeric_limits<double>::quiet_NaN();
    }
    st.history.push_back(rec);

    const Scalar scale = std::max(std::abs(previous), std::numeric_limits<Scalar>::min());
    const bool stalled = !gamma_changed && std::abs(previous - value) / scale < Scalar(cfg.outer_tol);
    previous = value;

    bool rank_ok = true;
    Scalar next_gamma = gamma;
    if constexpr (EmbedPolicy::rank_constrained) {
      rank_ok = rec.eig_sum < cfg.eps_rank;
      if (adapt) next_gamma = adapt_gamma<Scalar>(st.embedding.eigenvalues, embed.c, gamma, eps);
    }
    if (stalled && rank_ok && next_gamma == gamma) {
      st.converged = true;
      break;
    }
    gamma_changed = next_gamma != gamma;
    if (gamma_changed) {
      gamma = next_gamma;
      previous = evaluate();
    }
  }
  st.gamma = gamma;
  return st;
}

template <Real Scalar>
void check_fit_inputs(const Matrix<Scalar>& K, const Matrix<Scalar>& Dx, const SgskConfig& cfg) {
  const Index n = Dx.rows();
  if (Dx.cols() != n || K.rows() != n || K.cols() != n) throw InputError("kernel and distance sizes differ");
  if (!K.allFinite() || !Dx.allFinite()) throw InputError("non-finite kernel or distance entries");
  validate_config(cfg, n);
}

}  // namespace detail

/// Single-kernel structured graph learning.
template <Real Scalar>
SgskResult<Scalar> sgsk_fit(const Matrix<Scalar>& K, const Matrix<Scalar>& Dx, const SgskConfig& cfg) {
  detail::check_fit_inputs(K, Dx, cfg);
  const Scalar alpha = estimate_alpha(Dx, cfg.k).alpha;
  const Scalar gamma0 = cfg.gamma0 ? Scalar(*cfg.gamma0) : alpha;

  detail::FixedKernel<Scalar> kernel{K};
  detail::SpectralStep<Scalar> embed{cfg.c};
  auto st = detail::alternate<Scalar>(kernel, embed, Dx, cfg, alpha, gamma0, cfg.gamma_adapt);

  SgskResult<Scalar> out;
  auto read = labels_from_graph<Scalar>(st.Z, st.embedding.P, cfg.c, cfg.eps_rank, cfg.seed);
  out.labels = std::move(read.labels);
  out.components = read.components;
  out.used_fallback = read.used_fallback;
  out.Z = std::move(st.Z);
  out.embedding = {std::move(st.embedding.P), st.embedding.eigenvalues.head(cfg.c)};
  out.history = std::move(st.history);
  out.converged = st.converged;
  out.alpha = st.alpha;
  out.gamma = st.gamma;
  return out;
}

}  // namespace sgl
