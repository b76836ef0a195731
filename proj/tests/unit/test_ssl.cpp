#include "sgl/io.hpp"
#include "sgl/ssl.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Kernel = sgl::KernelMatrix<double>;

namespace {

Mat laplacian_of(const Mat& W) { return sgl::build_laplacian<double>(W).L; }

sgl::LabelSet label_set(std::vector<sgl::Index> idx, std::vector<int> classes, int c) {
  return {std::move(idx), std::move(classes), c};
}

/// Two triangles {0,1,2} and {3,4,5} with random positive weights.
Mat two_triangles(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Mat W = Mat::Zero(6, 6);
  for (int base : {0, 3})
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) W(base + i, base + j) = W(base + j, base + i) = u(rng);
  return W;
}

}  // namespace

TEST_CASE("fully labeled input returns the labels") {
  Mat L = laplacian_of(two_triangles(1));
  auto labels = label_set({0, 1, 2, 3, 4, 5}, {0, 0, 1, 1, 0, 1}, 2);
  Mat P = sgl::harmonic_labels(L, labels);
  Mat Y = Mat::Zero(6, 2);
  for (int i = 0; i < 6; ++i) Y(i, labels.classes[i]) = 1;
  CHECK(P == Y);
}

TEST_CASE("two disjoint edges copy their labeled neighbor") {
  Mat W = Mat::Zero(4, 4);
  W(0, 1) = W(1, 0) = 0.7;
  W(2, 3) = W(3, 2) = 0.4;
  auto labels = label_set({0, 3}, {0, 1}, 2);
  Mat P = sgl::harmonic_labels(laplacian_of(W), labels);
  CHECK((P.row(1) - Eigen::RowVector2d(1, 0)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((P.row(2) - Eigen::RowVector2d(0, 1)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(P.row(0) == Eigen::RowVector2d(1, 0));
  CHECK(P.row(3) == Eigen::RowVector2d(0, 1));
}

TEST_CASE("harmonic rows are constant on single-class components") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    Mat L = laplacian_of(two_triangles(seed));
    auto labels = label_set({1, 5}, {1, 0}, 2);
    Mat P = sgl::harmonic_labels(L, labels);
    for (int i : {0, 2}) CHECK((P.row(i) - Eigen::RowVector2d(0, 1)).cwiseAbs().maxCoeff() <= 1e-8);
    for (int i : {3, 4}) CHECK((P.row(i) - Eigen::RowVector2d(1, 0)).cwiseAbs().maxCoeff() <= 1e-8);
    auto pred = sgl::decide_labels<double>(P);
    CHECK(pred == sgl::Labeling{1, 1, 1, 0, 0, 0});
  }
}

TEST_CASE("harmonic solution on a connected graph") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 15;
    Mat W(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) W(i, j) = u(rng) < 0.4 ? u(rng) : 0.0;
    W = (W + W.transpose()) / 2;
    for (int i = 0; i + 1 < n; ++i) W(i, i + 1) = W(i + 1, i) = 0.5;  // keep it connected
    Mat L = laplacian_of(W);
    auto labels = label_set({0, 7, 14}, {0, 1, 2}, 3);
    Mat P = sgl::harmonic_labels(L, labels);

    Mat LP = L * P;
    for (int i = 0; i < n; ++i) {
      if (i == 0 || i == 7 || i == 14) continue;
      CHECK(LP.row(i).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK(std::abs(P.row(i).sum() - 1.0) <= 1e-6);
      CHECK(P.row(i).minCoeff() >= -1e-9);
      CHECK(P.row(i).maxCoeff() <= 1 + 1e-9);
    }
  }
}

TEST_CASE("unanchored components degrade and fully singular systems throw") {
  // Component {2,3} has no labeled sample: the ridge leaves it near zero.
  Mat W = Mat::Zero(4, 4);
  W(0, 1) = W(1, 0) = 1.0;
  W(2, 3) = W(3, 2) = 1.0;
  Mat P = sgl::harmonic_labels(laplacian_of(W), label_set({0, 1}, {0, 1}, 2));
  CHECK(P.bottomRows(2).cwiseAbs().maxCoeff() <= 1e-6);

  // Unlabeled samples without any edge: L_uu is exactly zero.
  Mat iso = Mat::Zero(4, 4);
  iso(0, 1) = iso(1, 0) = 1.0;
  try {
    sgl::harmonic_labels(laplacian_of(iso), label_set({0, 1}, {0, 1}, 2));
    FAIL("expected SingularSystemError");
  } catch (const sgl::SingularSystemError& e) {
    CHECK(e.component == std::vector<sgl::Index>{2, 3});
  }
}

TEST_CASE("label set validation") {
  Mat L = laplacian_of(two_triangles(3));
  CHECK_THROWS_AS(sgl::harmonic_labels(L, label_set({0, 1}, {0, 0}, 2)), sgl::ConfigError);
  CHECK_THROWS_AS(sgl::harmonic_labels(L, label_set({0, 0}, {0, 1}, 2)), sgl::InputError);
  CHECK_THROWS_AS(sgl::harmonic_labels(L, label_set({0, 9}, {0, 1}, 2)), sgl::InputError);
  CHECK_THROWS_AS(sgl::harmonic_labels(L, label_set({0, 1}, {0, 2}, 2)), sgl::InputError);
}

TEST_CASE("argmax decision rule") {
  Mat onehot(3, 3);
  onehot << 0, 1, 0, 1, 0, 0, 0, 0, 1;
  CHECK(sgl::decide_labels<double>(onehot) == sgl::Labeling{1, 0, 2});
  Mat scores(2, 2);
  scores << 0.4, 0.6, 0.5, 0.5;
  CHECK(sgl::decide_labels<double>(scores) == sgl::Labeling{1, 0});
}

TEST_CASE("semi-supervised fit on two blobs") {
  sgl::SynthOptions so;
  so.n = 60;
  so.classes = 2;
  so.seed = 4;
  auto data = sgl::make_synthetic(so);
  Mat D = sgl::pairwise_sq_dist<double>(data.X);
  auto bank = sgl::build_kernel_bank(data.X, sgl::default_ssl_bank());
  auto labels = label_set({0, 35}, {(*data.truth)[0], (*data.truth)[35]}, 2);
  sgl::SgskConfig cfg;
  cfg.k = 9;
  auto res = sgl::sgmk_ssl_fit<double>(bank, D, labels, cfg);
  CHECK(res.predicted == *data.truth);
  CHECK(res.P.row(0) == Eigen::RowVector2d::Unit(labels.classes[0]));
  CHECK(std::abs(res.weights.cwiseSqrt().sum() - 1.0) <= 1e-10);
  for (std::size_t i = 1; i < res.history.size(); ++i)
    CHECK(res.history[i].objective <= res.history[i - 1].objective + 1e-8 * std::abs(res.history[i - 1].objective));

  // Every sample labeled: predictions equal the labels.
  sgl::LabelSet all;
  all.c = 2;
  for (int i = 0; i < 60; ++i) {
    all.labeled_indices.push_back(i);
    all.classes.push_back((*data.truth)[i]);
  }
  CHECK(sgl::sgmk_ssl_fit<double>(bank, D, all, cfg).predicted == *data.truth);
}

TEST_CASE("semi-supervised fit is permutation equivariant") {
  sgl::SynthOptions so;
  so.n = 40;
  so.classes = 2;
  so.seed = 8;
  auto data = sgl::make_synthetic(so);
  const int n = 40;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(5));
  Mat Xp(n, 2);
  for (int i = 0; i < n; ++i) Xp.row(i) = data.X.row(perm[i]);

  std::vector<sgl::Index> idx = {3, 25};
  auto labels = label_set(idx, {(*data.truth)[3], (*data.truth)[25]}, 2);
  std::vector<int> inverse(n);
  for (int i = 0; i < n; ++i) inverse[perm[i]] = i;
  auto labels_p = label_set({inverse[3], inverse[25]}, labels.classes, 2);

  sgl::SgskConfig cfg;
  cfg.k = 4;
  auto a = sgl::sgmk_ssl_fit<double>(sgl::build_kernel_bank(data.X, sgl::default_ssl_bank()),
                                     sgl::pairwise_sq_dist<double>(data.X), labels, cfg);
  auto b = sgl::sgmk_ssl_fit<double>(sgl::build_kernel_bank(Xp, sgl::default_ssl_bank()),
                                     sgl::pairwise_sq_dist<double>(Xp), labels_p, cfg);
  // Random initialization differs between orderings; the final labels must not.
  for (int i = 0; i < n; ++i) CHECK(b.predicted[i] == a.predicted[perm[i]]);
}
