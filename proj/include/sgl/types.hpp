#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgl {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Cluster / class assignment, ids are 0-based.
using Labeling = std::vector<int>;

template <typename T>
concept Real = std::floating_point<T>;

// Error hierarchy. Every failure raised by the library derives from sgl::Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed numeric input (non-finite entries, shape mismatch).
struct InputError : Error {
  using Error::Error;
};

/// Data for which a quantity is undefined, e.g. all samples identical.
struct DegenerateDataError : Error {
  using Error::Error;
};

/// Configuration out of its valid range.
struct ConfigError : Error {
  using Error::Error;
};

/// Factorization or solver breakdown.
struct NumericalError : Error {
  using Error::Error;
};

/// Harmonic system with no unique solution. `component` lists the unlabeled
/// samples that have no path to any labeled sample.
struct SingularSystemError : NumericalError {
  SingularSystemError(const std::string& what, std::vector<Index> component)
      : NumericalError(what), component(std::move(component)) {}
  std::vector<Index> component;
};

/// Unparseable dataset file; `line` is 1-based, 0 when not line-specific.
struct FormatError : Error {
  FormatError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line(line) {}
  std::size_t line;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace sgl
