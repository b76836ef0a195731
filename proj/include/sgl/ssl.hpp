#pragma once

// Semi-supervised classification on the learned graph. Labeled rows of P are
// clamped to their one-hot targets and the unlabeled rows take the harmonic
// solution of LP = 0; graph, weights and P are alternated as in the
// multiple-kernel clustering fit.

#include "sgl/graph.hpp"
#include "sgl/metrics.hpp"
#include "sgl/multi_kernel.hpp"
#include "sgl/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace sgl {

/// Labeled samples and their classes (0-based, each of 0..c-1 present).
struct LabelSet {
  std::vector<Index> labeled_indices;
  std::vector<int> classes;
  int c = 0;

  void validate(Index n) const {
    if (labeled_indices.size() != classes.size()) throw InputError("one class per labeled index required");
    if (c < 1) throw ConfigError("class count must be positive");
    std::vector<char> seen_index(static_cast<std::size_t>(n), 0);
    std::vector<char> seen_class(static_cast<std::size_t>(c), 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const Index idx = labeled_indices[i];
      if (idx < 0 || idx >= n) throw InputError("labeled index out of range");
      if (seen_index[idx]++) throw InputError("sample labeled twice");
      if (classes[i] < 0 || classes[i] >= c) throw InputError("class id out of range");
      seen_class[classes[i]] = 1;
    }
    for (int k = 0; k < c; ++k)
      if (!seen_class[k]) throw ConfigError("class " + std::to_string(k) + " has no labeled sample");
  }
};

template <Real Scalar>
struct SslResult {
  Matrix<Scalar> Z;
  Matrix<Scalar> P;
  Labeling predicted;
  Vector<Scalar> weights;
  std::vector<IterationRecord> history;
  bool converged = false;
  Scalar alpha = 0;
  Scalar gamma = 0;
};

namespace detail {

/// Unlabeled samples whose connected component (edges with weight > 0)
/// contains no labeled sample.
template <Real Scalar>
std::vector<Index> unanchored_samples(const Matrix<Scalar>& L, const std::vector<char>& is_labeled) {
  Matrix<Scalar> W = -L;
  W.diagonal().setZero();
  auto comp = connected_components(W, 0.0);
  std::vector<char> anchored(static_cast<std::size_t>(comp.count), 0);
  for (std::size_t i = 0; i < is_labeled.size(); ++i)
    if (is_labeled[i]) anchored[comp.labels[i]] = 1;
  std::vector<Index> out;
  for (std::size_t i = 0; i < is_labeled.size(); ++i)
    if (!anchored[comp.labels[i]]) out.push_back(static_cast<Index>(i));
  return out;
}

}  // namespace detail

/// P_l = Y_l and P_u = -(L_uu + eps I)^-1 L_ul Y_l with a relative ridge
/// eps = 1e-10 Tr(L_uu)/u. Samples are never reordered.
template <Real Scalar>
Matrix<Scalar> harmonic_labels(const Matrix<Scalar>& L, const LabelSet& labels) {
  const Index n = L.rows();
  labels.validate(n);
  const int c = labels.c;

  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  Matrix<Scalar> P = Matrix<Scalar>::Zero(n, c);
  for (std::size_t i = 0; i < labels.classes.size(); ++i) {
    is_labeled[labels.labeled_indices[i]] = 1;
    P(labels.labeled_indices[i], labels.classes[i]) = Scalar(1);
  }

  std::vector<Index> unl;
  for (Index i = 0; i < n; ++i)
    if (!is_labeled[i]) unl.push_back(i);
  const Index u = static_cast<Index>(unl.size());
  if (u == 0) return P;

  Matrix<Scalar> Luu(u, u);
  Matrix<Scalar> rhs = Matrix<Scalar>::Zero(u, c);
  for (Index a = 0; a < u; ++a) {
    for (Index b = 0; b < u; ++b) Luu(a, b) = L(unl[a], unl[b]);
    for (std::size_t j = 0; j < labels.classes.size(); ++j)
      rhs(a, labels.classes[j]) -= L(unl[a], labels.labeled_indices[j]);
  }

  const Scalar ridge = Scalar(1e-10) * Luu.trace() / Scalar(u);
  Luu.diagonal().array() += ridge;

  auto fail = [&]() -> Matrix<Scalar> {
    auto bad = detail::unanchored_samples(L, is_labeled);
    std::string msg = "harmonic system is singular; unlabeled samples without a labeled neighbor path:";
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg += " " + std::to_string(bad[i]);
    if (bad.size() > 20) msg += " ...";
    throw SingularSystemError(msg, std::move(bad));
  };

  if (!(ridge > 0)) return fail();
  Eigen::LDLT<Matrix<Scalar>> ldlt(Luu);
  if (ldlt.info() != Eigen::Success) return fail();
  Matrix<Scalar> Pu = ldlt.solve(rhs);
  if (!Pu.allFinite()) return fail();

  for (Index a = 0; a < u; ++a) P.row(unl[a]) = Pu.row(a);
  return P;
}

/// Row-wise argmax; ties go to the smallest class index.
template <Real Scalar>
Labeling decide_labels(const Matrix<Scalar>& P) {
  if (!P.allFinite()) throw InputError("decide_labels: non-finite scores");
  Labeling out(P.rows(), 0);
  for (Index i = 0; i < P.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < P.cols(); ++j)
      if (P(i, j) > P(i, best)) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

namespace detail {

template <Real Scalar>
struct HarmonicStep {
  const LabelSet& labels;
  static constexpr bool rank_constrained = false;

  EmbeddingStep<Scalar> operator()(const Matrix<Scalar>& Z) const {
    auto lap = build_laplacian(Z);
    EmbeddingStep<Scalar> out;
    out.P = harmonic_labels(lap.L, labels);
    out.penalty = (out.P.transpose() * lap.L * out.P).trace();
    return out;
  }
};

}  // namespace detail

/// Semi-supervised fit over a kernel bank. The class count comes from
/// `labels`; gamma stays at cfg.gamma0 (or alpha) throughout.
template <Real Scalar>
SslResult<Scalar> sgmk_ssl_fit(std::span<const KernelMatrix<Scalar>> kernels, const Matrix<Scalar>& Dx,
                               const LabelSet& labels, SgskConfig cfg) {
  detail::check_bank(kernels, Dx);
  labels.validate(Dx.rows());
  cfg.c = labels.c;
  detail::check_fit_inputs(kernels.front().values, Dx, cfg);

  const Scalar alpha = estimate_alpha(Dx, cfg.k).alpha;
  const Scalar gamma = cfg.gamma0 ? Scalar(*cfg.gamma0) : alpha;
  const Index r = static_cast<Index>(kernels.size());

  detail::WeightedKernel<Scalar> kernel(kernels, Vector<Scalar>::Constant(r, Scalar(1) / Scalar(r)));
  detail::HarmonicStep<Scalar> embed{labels};
  auto st = detail::alternate<Scalar>(kernel, embed, Dx, cfg, alpha, gamma, false);

  SslResult<Scalar> out;
  out.predicted = decide_labels(st.embedding.P);
  out.Z = std::move(st.Z);
  out.P = std::move(st.embedding.P);
  out.weights = kernel.w;
  out.history = std::move(st.history);
  out.converged = st.converged;
  out.alpha = st.alpha;
  out.gamma = st.gamma;
  return out;
}

}  // namespace sgl
