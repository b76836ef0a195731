#pragma once

// Multiple-kernel variant: the kernel is a consensus K_w = sum_i w_i K^i with
// weights on {w >= 0, sum_i sqrt(w_i) = 1}, re-estimated after every graph
// update.

#include "sgl/graph.hpp"
#include "sgl/kernel_bank.hpp"
#include "sgl/types.hpp"

#include <span>
#include <vector>

namespace sgl {

inline constexpr double kResidualFloor = 1e-12;

template <Real Scalar>
struct SgmkResult : SgskResult<Scalar> {
  Vector<Scalar> weights;
  /// Weights after each outer iteration.
  std::vector<Vector<Scalar>> weight_history;
};

template <Real Scalar>
Matrix<Scalar> combine_kernels(std::span<const KernelMatrix<Scalar>> kernels, const Vector<Scalar>& w) {
  if (kernels.empty()) throw InputError("no kernels to combine");
  if (w.size() != static_cast<Index>(kernels.size())) throw InputError("one weight per kernel required");
  const Index n = kernels.front().size();
  Matrix<Scalar> Kw = Matrix<Scalar>::Zero(n, n);
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (kernels[i].values.rows() != n || kernels[i].values.cols() != n)
      throw InputError("kernel sizes differ");
    Kw += w(static_cast<Index>(i)) * kernels[i].values;
  }
  return Kw;
}

/// h_i = Tr(K^i - 2 K^i Z + Z' K^i Z), the self-expression residual of each
/// kernel. Not floored here.
template <Real Scalar>
Vector<Scalar> compute_h(std::span<const KernelMatrix<Scalar>> kernels, const Matrix<Scalar>& Z) {
  Vector<Scalar> h(static_cast<Index>(kernels.size()));
  for (std::size_t i = 0; i < kernels.size(); ++i)
    h(static_cast<Index>(i)) = detail::self_expression_residual(kernels[i].values, Z);
  return h;
}

/// Closed-form minimizer of sum_i w_i h_i on the sqrt-simplex:
/// w_i = (h_i sum_j 1/h_j)^-2. Entries of h are floored at kResidualFloor.
template <Real Scalar>
Vector<Scalar> update_weights(const Vector<Scalar>& h) {
  if (h.size() < 1) throw InputError("empty residual vector");
  if (!h.allFinite()) throw NumericalError("non-finite kernel residual");
  if (h.size() == 1) return Vector<Scalar>::Ones(1);
  const Vector<Scalar> floored = h.cwiseMax(Scalar(kResidualFloor));
  const Scalar inv_sum = floored.cwiseInverse().sum();
  const Vector<Scalar> share = floored.cwiseInverse() / inv_sum;
  return share.cwiseProduct(share);
}

namespace detail {

template <Real Scalar>
struct WeightedKernel {
  std::span<const KernelMatrix<Scalar>> kernels;
  Vector<Scalar> w;
  Matrix<Scalar> Kw;
  std::vector<Vector<Scalar>> history;

  WeightedKernel(std::span<const KernelMatrix<Scalar>> ks, Vector<Scalar> w0)
      : kernels(ks), w(std::move(w0)), Kw(combine_kernels<Scalar>(ks, w)) {}

  const Matrix<Scalar>& current() const { return Kw; }

  void update(const Matrix<Scalar>& Z) {
    w = update_weights<Scalar>(compute_h<Scalar>(kernels, Z));
    Kw = combine_kernels<Scalar>(kernels, w);
    history.push_back(w);
  }
};

template <Real Scalar>
void check_bank(std::span<const KernelMatrix<Scalar>> kernels, const Matrix<Scalar>& Dx) {
  if (kernels.empty()) throw ConfigError("kernel bank is empty");
  for (const auto& K : kernels)
    if (K.values.rows() != Dx.rows() || K.values.cols() != Dx.rows())
      throw InputError("kernel and distance sizes differ");
}

}  // namespace detail

/// Multiple-kernel structured graph learning. Weights start at 1/r.
template <Real Scalar>
SgmkResult<Scalar> sgmk_fit(std::span<const KernelMatrix<Scalar>> kernels, const Matrix<Scalar>& Dx,
                            const SgskConfig& cfg) {
  detail::check_bank(kernels, Dx);
  detail::check_fit_inputs(kernels.front().values, Dx, cfg);
  const Scalar alpha = estimate_alpha(Dx, cfg.k).alpha;
  const Scalar gamma0 = cfg.gamma0 ? Scalar(*cfg.gamma0) : alpha;
  const Index r = static_cast<Index>(kernels.size());

  detail::WeightedKernel<Scalar> kernel(kernels, Vector<Scalar>::Constant(r, Scalar(1) / Scalar(r)));
  detail::SpectralStep<Scalar> embed{cfg.c};
  auto st = detail::alternate<Scalar>(kernel, embed, Dx, cfg, alpha, gamma0, cfg.gamma_adapt);

  SgmkResult<Scalar> out;
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
  out.weights = kernel.w;
  out.weight_history = std::move(kernel.history);
  return out;
}

}  // namespace sgl
