#pragma once

#include "sgl/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sgl {

/// Describes one kernel of a bank: Gaussian with bandwidth factor t, linear,
/// or polynomial (a + x'y)^b.
struct KernelSpec {
  enum class Kind { gaussian, linear, polynomial };

  Kind kind = Kind::linear;
  double t = 1.0;
  double a = 0.0;
  int b = 2;

  static KernelSpec gaussian(double t) { return {Kind::gaussian, t, 0.0, 2}; }
  static KernelSpec linear() { return {Kind::linear, 1.0, 0.0, 2}; }
  static KernelSpec polynomial(double a, int b) { return {Kind::polynomial, 1.0, a, b}; }

  bool operator==(const KernelSpec&) const = default;
};

/// Formats as "gaussian:<t>", "linear" or "poly:<a>:<b>".
inline std::string to_string(const KernelSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case KernelSpec::Kind::gaussian: os << "gaussian:" << spec.t; break;
    case KernelSpec::Kind::linear: os << "linear"; break;
    case KernelSpec::Kind::polynomial: os << "poly:" << spec.a << ':' << spec.b; break;
  }
  return os.str();
}

/// Parses one kernel token as produced by to_string.
inline KernelSpec parse_kernel_spec(std::string_view token) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : token) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);

  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + s + "' in kernel spec '" + std::string(token) + "'");
    }
  };

  const std::string& name = parts.front();
  if (name == "linear" && parts.size() == 1) return KernelSpec::linear();
  if (name == "gaussian" && parts.size() == 2) {
    double t = number(parts[1]);
    if (!(t > 0)) throw ConfigError("gaussian bandwidth must be positive");
    return KernelSpec::gaussian(t);
  }
  if ((name == "poly" || name == "polynomial") && parts.size() == 3) {
    double b = number(parts[2]);
    if (b < 1 || b != std::floor(b)) throw ConfigError("polynomial degree must be a positive integer");
    return KernelSpec::polynomial(number(parts[1]), static_cast<int>(b));
  }
  throw ConfigError("unknown kernel spec '" + std::string(token) + "'");
}

/// Parses a comma separated list of kernel tokens.
inline std::vector<KernelSpec> parse_kernel_list(std::string_view list) {
  std::vector<KernelSpec> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    auto token = list.substr(start, end - start);
    if (!token.empty()) out.push_back(parse_kernel_spec(token));
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("empty kernel list");
  return out;
}

/// Seven Gaussian bandwidths, a linear kernel and four polynomial kernels.
inline std::vector<KernelSpec> default_cluster_bank() {
  std::vector<KernelSpec> bank;
  for (double t : {0.01, 0.05, 0.1, 1.0, 10.0, 50.0, 100.0}) bank.push_back(KernelSpec::gaussian(t));
  bank.push_back(KernelSpec::linear());
  for (double a : {0.0, 1.0})
    for (int b : {2, 4}) bank.push_back(KernelSpec::polynomial(a, b));
  return bank;
}

/// Four Gaussian bandwidths, a linear kernel and two quadratic kernels.
inline std::vector<KernelSpec> default_ssl_bank() {
  std::vector<KernelSpec> bank;
  for (double t : {0.1, 1.0, 10.0, 100.0}) bank.push_back(KernelSpec::gaussian(t));
  bank.push_back(KernelSpec::linear());
  for (double a : {0.0, 1.0}) bank.push_back(KernelSpec::polynomial(a, 2));
  return bank;
}

template <Real Scalar>
struct KernelMatrix {
  Matrix<Scalar> values;
  KernelSpec kind;

  Index size() const { return values.rows(); }
};

namespace detail {

template <Real Scalar>
void validate_features(const Matrix<Scalar>& X) {
  if (X.rows() < 2 || X.cols() < 1) throw InputError("feature matrix needs at least 2 rows and 1 column");
  if (!X.allFinite()) throw InputError("feature matrix contains non-finite values");
}

template <Real Scalar>
void symmetrize(Matrix<Scalar>& K) {
  Matrix<Scalar> sym = (K + K.transpose()) / Scalar(2);
  K = std::move(sym);
}

}  // namespace detail

/// Squared Euclidean distances between rows of X. Round-off below zero is
/// clamped and the diagonal is exactly zero.
template <Real Scalar>
Matrix<Scalar> pairwise_sq_dist(const Matrix<Scalar>& X) {
  detail::validate_features(X);
  const Index n = X.rows();
  Matrix<Scalar> D(n, n);
  for (Index j = 0; j < n; ++j) {
    D(j, j) = Scalar(0);
    for (Index i = j + 1; i < n; ++i) {
      Scalar d = (X.row(i) - X.row(j)).squaredNorm();
      D(i, j) = D(j, i) = std::max(d, Scalar(0));
    }
  }
  return D;
}

/// exp(-|xi - xj|^2 / (t * dmax^2)), dmax the largest pairwise distance.
template <Real Scalar>
KernelMatrix<Scalar> gaussian_kernel(const Matrix<Scalar>& X, Scalar t) {
  if (!(t > 0)) throw ConfigError("gaussian bandwidth must be positive");
  Matrix<Scalar> D = pairwise_sq_dist(X);
  const Scalar dmax2 = D.maxCoeff();
  if (!(dmax2 > 0)) throw DegenerateDataError("gaussian kernel undefined: all samples identical");
  Matrix<Scalar> K = (-D.array() / (t * dmax2)).exp().matrix();
  K.diagonal().setOnes();
  detail::symmetrize(K);
  return {std::move(K), KernelSpec::gaussian(static_cast<double>(t))};
}

template <Real Scalar>
KernelMatrix<Scalar> linear_kernel(const Matrix<Scalar>& X) {
  detail::validate_features(X);
  Matrix<Scalar> K = X * X.transpose();
  detail::symmetrize(K);
  return {std::move(K), KernelSpec::linear()};
}

template <Real Scalar>
KernelMatrix<Scalar> polynomial_kernel(const Matrix<Scalar>& X, Scalar a, int b) {
  if (b < 1) throw ConfigError("polynomial degree must be >= 1");
  detail::validate_features(X);
  Matrix<Scalar> G = X * X.transpose();
  Matrix<Scalar> K = (G.array() + a).pow(Scalar(b)).matrix();
  detail::symmetrize(K);
  return {std::move(K), KernelSpec::polynomial(static_cast<double>(a), b)};
}

/// Divides every entry by the largest absolute entry.
template <Real Scalar>
KernelMatrix<Scalar> normalize_kernel(KernelMatrix<Scalar> K) {
  if (!K.values.allFinite()) throw InputError("kernel contains non-finite values");
  const Scalar scale = K.values.cwiseAbs().maxCoeff();
  if (!(scale > 0)) throw DegenerateDataError("cannot normalize an all-zero kernel");
  K.values /= scale;
  return K;
}

template <Real Scalar>
KernelMatrix<Scalar> make_kernel(const Matrix<Scalar>& X, const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelSpec::Kind::gaussian: return gaussian_kernel(X, static_cast<Scalar>(spec.t));
    case KernelSpec::Kind::linear: return linear_kernel(X);
    case KernelSpec::Kind::polynomial: return polynomial_kernel(X, static_cast<Scalar>(spec.a), spec.b);
  }
  throw ConfigError("unknown kernel kind");
}

/// Builds and normalizes every kernel of `specs`, in order.
template <Real Scalar>
std::vector<KernelMatrix<Scalar>> build_kernel_bank(const Matrix<Scalar>& X,
                                                    const std::vector<KernelSpec>& specs) {
  if (specs.empty()) throw ConfigError("kernel bank spec is empty");
  std::vector<KernelMatrix<Scalar>> bank;
  bank.reserve(specs.size());
  for (const auto& spec : specs) bank.push_back(normalize_kernel(make_kernel(X, spec)));
  return bank;
}

/// Per-feature z-score. Constant features are centered but left unscaled.
template <Real Scalar>
Matrix<Scalar> zscore(const Matrix<Scalar>& X) {
  Matrix<Scalar> out = X.rowwise() - X.colwise().mean();
  for (Index j = 0; j < out.cols(); ++j) {
    Scalar sd = std::sqrt(out.col(j).squaredNorm() / Scalar(out.rows()));
    if (sd > 0) out.col(j) /= sd;
  }
  return out;
}

}  // namespace sgl
