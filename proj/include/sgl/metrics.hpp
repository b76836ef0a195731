#pragma once

// Label read-out from learned graphs and external clustering scores.

#include "sgl/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace sgl {

struct Components {
  Labeling labels;
  int count = 0;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

/// Maps arbitrary integer ids to 0..k-1 in order of first appearance.
inline Labeling compact(const Labeling& labels, int* count = nullptr) {
  std::map<int, int> ids;
  Labeling out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  if (count) *count = static_cast<int>(ids.size());
  return out;
}

inline void check_lengths(const Labeling& pred, const Labeling& truth) {
  if (pred.size() != truth.size()) throw InputError("labelings have different lengths");
  if (pred.empty()) throw InputError("labelings are empty");
}

/// Contingency table, rows indexed by compacted pred ids, cols by truth ids.
inline std::vector<std::vector<double>> contingency(const Labeling& pred, const Labeling& truth) {
  int kp = 0, kt = 0;
  Labeling p = compact(pred, &kp);
  Labeling t = compact(truth, &kt);
  std::vector<std::vector<double>> table(kp, std::vector<double>(kt, 0.0));
  for (std::size_t i = 0; i < p.size(); ++i) table[p[i]][t[i]] += 1.0;
  return table;
}

}  // namespace detail

/// Connected components of the graph with an edge (i,j) whenever
/// (z_ij + z_ji) / 2 > eps. Labels follow order of first appearance.
template <typename Derived>
Components connected_components(const Eigen::MatrixBase<Derived>& Z, double eps) {
  const Index n = Z.rows();
  detail::DisjointSets sets(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i)
      if (static_cast<double>(Z(i, j) + Z(j, i)) / 2.0 > eps) sets.unite(i, j);

  Labeling roots(n);
  for (Index i = 0; i < n; ++i) roots[i] = static_cast<int>(sets.find(i));
  Components out;
  out.labels = detail::compact(roots, &out.count);
  return out;
}

/// Solves the square assignment problem, maximizing total weight.
/// Returns assignment[row] = column. O(n^3) shortest augmenting paths.
inline std::vector<int> hungarian_max(const std::vector<std::vector<double>>& weight) {
  const int n = static_cast<int>(weight.size());
  if (n == 0) return {};
  double wmax = 0;
  for (const auto& row : weight)
    for (double w : row) wmax = std::max(wmax, w);

  // Minimize cost = wmax - weight with 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[col0] = true;
      const int r = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double cur = (wmax - weight[r - 1][col - 1]) - u[r] - v[col];
        if (cur < minv[col]) {
          minv[col] = cur;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (int col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0);
  }

  std::vector<int> assignment(n, -1);
  for (int col = 1; col <= n; ++col)
    if (match[col]) assignment[match[col] - 1] = col - 1;
  return assignment;
}

/// Fraction of samples correctly labeled under the best one-to-one mapping
/// between predicted and true ids.
inline double clustering_accuracy(const Labeling& pred, const Labeling& truth) {
  detail::check_lengths(pred, truth);
  auto table = detail::contingency(pred, truth);
  const std::size_t kp = table.size(), kt = table.front().size();
  const std::size_t k = std::max(kp, kt);
  std::vector<std::vector<double>> square(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < kp; ++r)
    for (std::size_t c = 0; c < kt; ++c) square[r][c] = table[r][c];

  auto assignment = hungarian_max(square);
  double matched = 0;
  for (std::size_t r = 0; r < k; ++r) matched += square[r][assignment[r]];
  return matched / static_cast<double>(pred.size());
}

enum class NmiNormalization { sqrt, max };

/// Normalized mutual information with natural logarithms.
inline double nmi(const Labeling& pred, const Labeling& truth,
                  NmiNormalization norm = NmiNormalization::sqrt) {
  detail::check_lengths(pred, truth);
  auto table = detail::contingency(pred, truth);
  const double n = static_cast<double>(pred.size());
  const std::size_t kp = table.size(), kt = table.front().size();

  std::vector<double> rows(kp, 0.0), cols(kt, 0.0);
  for (std::size_t r = 0; r < kp; ++r)
    for (std::size_t c = 0; c < kt; ++c) {
      rows[r] += table[r][c];
      cols[c] += table[r][c];
    }

  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0;
    for (double m : counts)
      if (m > 0) h -= (m / n) * std::log(m / n);
    return h;
  };
  const double hp = entropy(rows), ht = entropy(cols);
  if (kp == 1 && kt == 1) return 1.0;
  if (hp <= 0 || ht <= 0) return 0.0;

  double mi = 0;
  for (std::size_t r = 0; r < kp; ++r)
    for (std::size_t c = 0; c < kt; ++c) {
      const double m = table[r][c];
      if (m > 0) mi += (m / n) * std::log(n * m / (rows[r] * cols[c]));
    }
  const double denom = norm == NmiNormalization::sqrt ? std::sqrt(hp * ht) : std::max(hp, ht);
  return std::clamp(mi / denom, 0.0, 1.0);
}

/// Share of samples that belong to the majority true class of their cluster.
inline double purity(const Labeling& pred, const Labeling& truth) {
  detail::check_lengths(pred, truth);
  auto table = detail::contingency(pred, truth);
  double total = 0;
  for (const auto& row : table) total += *std::max_element(row.begin(), row.end());
  return total / static_cast<double>(pred.size());
}

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// within-cluster sum of squares wins.
template <Real Scalar>
Labeling kmeans(const Matrix<Scalar>& points, int k, int restarts, std::uint64_t seed, int max_iter = 300) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw ConfigError("k-means needs 1 <= k <= n");
  std::mt19937_64 rng(seed);

  Labeling best;
  Scalar best_cost = std::numeric_limits<Scalar>::infinity();
  for (int rep = 0; rep < restarts; ++rep) {
    Matrix<Scalar> centers(k, points.cols());
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Vector<Scalar> nearest = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      const Scalar total = nearest.sum();
      Index chosen = pick(rng);
      if (total > 0) {
        std::uniform_real_distribution<double> unif(0.0, static_cast<double>(total));
        double target = unif(rng);
        for (Index i = 0; i < n; ++i) {
          target -= static_cast<double>(nearest(i));
          if (target <= 0) {
            chosen = i;
            break;
          }
        }
      }
      centers.row(c) = points.row(chosen);
      nearest = nearest.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    Labeling assign(n, -1);
    Scalar cost = 0;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = false;
      cost = 0;
      for (Index i = 0; i < n; ++i) {
        Index arg = 0;
        Scalar d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&arg);
        cost += d;
        if (assign[i] != static_cast<int>(arg)) {
          assign[i] = static_cast<int>(arg);
          changed = true;
        }
      }
      if (!changed) break;
      Matrix<Scalar> sums = Matrix<Scalar>::Zero(k, points.cols());
      std::vector<int> counts(k, 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(assign[i]) += points.row(i);
        ++counts[assign[i]];
      }
      for (int c = 0; c < k; ++c)
        if (counts[c] > 0) centers.row(c) = sums.row(c) / Scalar(counts[c]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = assign;
    }
  }
  return detail::compact(best);
}

struct GraphLabels {
  Labeling labels;
  int components = 0;
  /// Set when the component count differed from c and k-means on the
  /// embedding produced the labels instead.
  bool used_fallback = false;
};

/// Component labels when the graph has exactly c components, otherwise
/// k-means (10 seeded restarts) on the rows of the spectral embedding P.
template <Real Scalar>
GraphLabels labels_from_graph(const Matrix<Scalar>& Z, const Matrix<Scalar>& P, int c, double eps,
                              std::uint64_t seed = 0) {
  Components comp = connected_components(Z, eps);
  if (comp.count == c) return {std::move(comp.labels), comp.count, false};
  return {kmeans<Scalar>(P, c, 10, seed), comp.count, true};
}

}  // namespace sgl
