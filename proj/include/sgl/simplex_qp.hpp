#pragma once

// Quadratic programs over the probability simplex:
//
//   min_z  z'Az + b'z   s.t.  1'z = 1, z >= 0
//
// with A symmetric positive definite. The upper bound z <= 1 is implied by
// the constraints and never enforced separately.

#include "sgl/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

namespace sgl {

/// Euclidean projection onto {z : 1'z = 1, z >= 0} by sort-and-threshold.
template <Real Scalar>
Vector<Scalar> project_simplex(const Vector<Scalar>& v) {
  const Index n = v.size();
  if (n < 1) throw InputError("cannot project an empty vector onto the simplex");
  if (!v.allFinite()) throw InputError("simplex projection of non-finite vector");

  std::vector<Scalar> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());

  Scalar cumsum = 0;
  Scalar theta = 0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const Scalar candidate = (cumsum - Scalar(1)) / Scalar(j + 1);
    if (u[j] - candidate > 0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(Scalar(0)).matrix();
}

/// Gershgorin upper bound on the largest eigenvalue magnitude of A.
template <typename Derived>
typename Derived::Scalar gershgorin_bound(const Eigen::MatrixBase<Derived>& A) {
  return A.cwiseAbs().rowwise().sum().maxCoeff();
}

template <Real Scalar>
struct QpProblem {
  Eigen::Ref<const Matrix<Scalar>> A;
  Eigen::Ref<const Vector<Scalar>> b;

  Scalar objective(const Vector<Scalar>& z) const { return z.dot(A * z) + b.dot(z); }
};

template <Real Scalar>
struct QpOptions {
  Scalar tol = Scalar(1e-7);
  int max_iter = 2000;
  /// Run a Cholesky factorization of A first and fail when it is not PD.
  bool validate = false;
  /// Upper bound on lambda_max(A); <= 0 means compute it with Gershgorin.
  Scalar lambda_max = 0;
  /// Record the objective of every accepted iterate in QpSolution::trace.
  bool record_trace = false;
};

template <Real Scalar>
struct QpSolution {
  Vector<Scalar> z;
  Scalar kkt_residual = 0;
  Scalar objective = 0;
  int iterations = 0;
  bool truncated = false;
  std::vector<Scalar> trace;
};

namespace detail {

template <Real Scalar>
Scalar kkt_residual_from_gradient(const Vector<Scalar>& z, const Vector<Scalar>& grad, Scalar step) {
  Vector<Scalar> probe = project_simplex<Scalar>(z - step * grad);
  return (z - probe).cwiseAbs().maxCoeff() / step;
}

template <Real Scalar>
Scalar probe_step(const Eigen::Ref<const Matrix<Scalar>>& A, Scalar lambda_max) {
  Scalar lmax = lambda_max > 0 ? lambda_max : gershgorin_bound(A);
  if (!(lmax > 0)) lmax = Scalar(1);
  return Scalar(1) / (Scalar(2) * lmax);
}

}  // namespace detail

/// Projected-gradient stationarity measure; zero exactly at the minimizer.
/// The probe step is 1 / (2 lambda_max(A)) with the Gershgorin estimate
/// unless `lambda_max` is supplied.
template <Real Scalar>
Scalar kkt_residual(const QpProblem<Scalar>& p, const Vector<Scalar>& z, Scalar lambda_max = 0) {
  const Scalar step = detail::probe_step<Scalar>(p.A, lambda_max);
  Vector<Scalar> grad = Scalar(2) * (p.A * z) + p.b;
  return detail::kkt_residual_from_gradient<Scalar>(z, grad, step);
}

/// Accelerated projected gradient with adaptive restart. Whenever the
/// support of the iterate has been stable for a few iterations the
/// equality-constrained problem on that support is solved exactly; the
/// result is kept if it stays feasible and does not raise the objective.
/// The accepted objective sequence is nonincreasing.
template <Real Scalar>
QpSolution<Scalar> solve_column_qp(const QpProblem<Scalar>& p, const QpOptions<Scalar>& opts = {},
                                   const std::optional<Vector<Scalar>>& warm_start = std::nullopt) {
  const Index n = p.A.rows();
  if (p.A.cols() != n || p.b.size() != n) throw InputError("QP dimensions are inconsistent");
  if (!(opts.tol > 0)) throw ConfigError("QP tolerance must be positive");
  if (opts.validate) {
    Eigen::LLT<Matrix<Scalar>> llt(p.A);
    if (llt.info() != Eigen::Success) throw NumericalError("QP matrix is not positive definite");
  }

  // Step 1/L with L = 2 lambda_max(A), the Lipschitz constant of the gradient.
  const Scalar step = detail::probe_step<Scalar>(p.A, opts.lambda_max);
  const Scalar probe = step;

  QpSolution<Scalar> sol;
  Vector<Scalar> x;
  if (warm_start) {
    if (warm_start->size() != n) throw InputError("warm start has wrong length");
    x = project_simplex<Scalar>(*warm_start);
  } else {
    x = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  }

  Vector<Scalar> Ax = p.A * x;
  Scalar fx = x.dot(Ax) + p.b.dot(x);
  auto gradient = [&](const Vector<Scalar>& Az) -> Vector<Scalar> { return Scalar(2) * Az + p.b; };

  auto residual = [&]() { return detail::kkt_residual_from_gradient<Scalar>(x, gradient(Ax), probe); };

  auto finish = [&](int iterations, bool truncated) {
    sol.z = x;
    sol.objective = fx;
    sol.iterations = iterations;
    sol.truncated = truncated;
    sol.kkt_residual = residual();
    return sol;
  };

  if (opts.record_trace) sol.trace.push_back(fx);
  if (residual() <= opts.tol) return finish(0, false);

  // Exact minimizer over the face spanned by `support`, if it lies inside it.
  auto polish = [&](const std::vector<Index>& support) -> bool {
    const Index s = static_cast<Index>(support.size());
    Matrix<Scalar> As(s, s);
    Vector<Scalar> bs(s);
    for (Index r = 0; r < s; ++r) {
      bs(r) = p.b(support[r]);
      for (Index c = 0; c < s; ++c) As(r, c) = Scalar(2) * p.A(support[r], support[c]);
    }
    Eigen::LDLT<Matrix<Scalar>> ldlt(As);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    Vector<Scalar> u = ldlt.solve(-bs);
    Vector<Scalar> v = ldlt.solve(Vector<Scalar>::Ones(s));
    const Scalar vs = v.sum();
    if (!(std::abs(vs) > 0)) return false;
    const Scalar mu = (u.sum() - Scalar(1)) / vs;
    Vector<Scalar> zs = u - mu * v;
    if (!zs.allFinite() || (zs.array() < 0).any()) return false;

    Vector<Scalar> cand = Vector<Scalar>::Zero(n);
    for (Index r = 0; r < s; ++r) cand(support[r]) = zs(r);
    cand /= cand.sum();
    Vector<Scalar> Ac = p.A * cand;
    const Scalar fc = cand.dot(Ac) + p.b.dot(cand);
    if (!(fc <= fx)) return false;
    x = std::move(cand);
    Ax = std::move(Ac);
    fx = fc;
    return true;
  };

  auto support_of = [&](const Vector<Scalar>& z) {
    std::vector<Index> s;
    for (Index j = 0; j < n; ++j)
      if (z(j) > 0) s.push_back(j);
    return s;
  };

  constexpr int kStableForPolish = 4;
  Vector<Scalar> y = x;
  Vector<Scalar> Ay = Ax;
  Scalar t = 1;
  std::vector<Index> support = support_of(x);
  std::vector<Index> last_polished;
  int stable = 0;

  for (int it = 1; it <= opts.max_iter; ++it) {
    Vector<Scalar> xn = project_simplex<Scalar>(y - step * gradient(Ay));
    Vector<Scalar> Axn = p.A * xn;
    Scalar fxn = xn.dot(Axn) + p.b.dot(xn);

    if (fxn > fx) {
      // Momentum overshot: restart with a plain projected-gradient step.
      t = 1;
      xn = project_simplex<Scalar>(x - step * gradient(Ax));
      Axn = p.A * xn;
      fxn = xn.dot(Axn) + p.b.dot(xn);
      if (fxn > fx) {
        xn = x;
        Axn = Ax;
        fxn = fx;
      }
    }

    const Scalar tn = (Scalar(1) + std::sqrt(Scalar(1) + Scalar(4) * t * t)) / Scalar(2);
    const Scalar beta = (t - Scalar(1)) / tn;
    y = xn + beta * (xn - x);
    Ay = Axn + beta * (Axn - Ax);
    x = std::move(xn);
    Ax = std::move(Axn);
    fx = fxn;
    t = tn;

    auto new_support = support_of(x);
    stable = (new_support == support) ? stable + 1 : 0;
    support = std::move(new_support);

    if (stable >= kStableForPolish && support != last_polished) {
      last_polished = support;
      if (polish(support)) {
        y = x;
        Ay = Ax;
        t = 1;
      }
    }

    if (opts.record_trace) sol.trace.push_back(fx);
    if (residual() <= opts.tol) return finish(it, false);
  }

  // Final attempt on the current support before giving up.
  if (support != last_polished && polish(support) && opts.record_trace) sol.trace.push_back(fx);
  QpSolution<Scalar> out = finish(opts.max_iter, true);
  out.truncated = out.kkt_residual > opts.tol;
  return out;
}

}  // namespace sgl
