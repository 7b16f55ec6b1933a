#include <cmath>
#include <random>

#include "doctest.h"
#include "motionsm/baselines.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace motionsm;

TEST_SUITE("baselines") {
  TEST_CASE("rank-one data") {
    Vector v = Vector::Zero(9);
    v << 0.1, -0.3, 0.2, 0.5, -0.1, 0.0, 0.3, -0.6, 0.2;
    v.normalize();
    RowMatrix X(20, 9);
    X.rowwise() = v.transpose();
    const PcaResult p = pca_features(X, 1);
    // The largest-magnitude entry (-0.6 before normalising) must come out positive.
    CHECK((p.components.row(0).transpose() + v).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(p.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(p.rank == 1);
  }

  TEST_CASE("rank deficiency is reported") {
    RowMatrix X = RowMatrix::Zero(10, 4);
    X.col(0) = random_rows(10, 1, 1).col(0);
    const PcaResult p = pca_features(X, 3);
    CHECK(p.components.rows() == 3);
    CHECK_FALSE(p.warnings.empty());
  }

  TEST_CASE("components are orthonormal and match a Jacobi oracle") {
    const RowMatrix X = random_rows(300, 6, 2) * random_rows(6, 6, 3);
    const PcaResult p = pca_features(X, 3);
    CHECK((p.components * p.components.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    oracle::Mat ox(300, oracle::Vec(6));
    for (int t = 0; t < 300; ++t)
      for (int j = 0; j < 6; ++j) ox[t][j] = X(t, j);
    const oracle::Mat ref = oracle::pca_rows(ox, 3);
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 6; ++j) CHECK(p.components(k, j) == doctest::Approx(ref[k][j]).epsilon(1e-8));
  }

  TEST_CASE("PCA beats random orthonormal frames on its objective") {
    const RowMatrix X = random_rows(200, 8, 4) * random_rows(8, 8, 5);
    const PcaResult p = pca_features(X, 2);
    const double best = pca_objective(X, p.components);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::HouseholderQR<Matrix> qr(Matrix(random_rows(8, 2, 100 + trial)));
      const RowMatrix frame = Matrix(qr.householderQ()).leftCols(2).transpose();
      CHECK(best <= pca_objective(X, frame) + 1e-12);
    }
  }

  TEST_CASE("k-means on separated clouds") {
    const double radius = 0.1;
    RowMatrix X(200, 2);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-radius / std::sqrt(2.0), radius / std::sqrt(2.0));
    for (int i = 0; i < 200; ++i) {
      const double cx = i < 100 ? -5.0 : 5.0;
      X(i, 0) = cx + u(rng);
      X(i, 1) = 2.0 + u(rng);
    }
    const Eigen::RowVector2d left = X.topRows(100).colwise().mean();
    const Eigen::RowVector2d right = X.bottomRows(100).colwise().mean();
    const KmeansResult k = kmeans_features(X, 2, 1);
    CHECK(k.converged);
    for (int c = 0; c < 2; ++c) {
      const double d = std::min((k.centroids.row(c) - left).norm(), (k.centroids.row(c) - right).norm());
      CHECK(d < 0.1 * radius);
    }
  }

  TEST_CASE("k-means with K distinct points has zero inertia") {
    RowMatrix X(6, 3);
    X << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    const KmeansResult k = kmeans_features(X, 3, 11);
    CHECK(k.inertia == doctest::Approx(0.0));
  }

  TEST_CASE("k-means inertia never increases and is deterministic") {
    const RowMatrix X = random_rows(500, 5, 7);
    const KmeansResult a = kmeans_features(X, 4, 3);
    const KmeansResult b = kmeans_features(X, 4, 3);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignments == b.assignments);
    for (std::size_t i = 1; i < a.inertia_history.size(); ++i)
      CHECK(a.inertia_history[i] <= a.inertia_history[i - 1] + 1e-12);
    const RowMatrix hot = a.one_hot();
    CHECK(hot.rows() == 500);
    CHECK((hot.rowwise().sum().array() == 1.0).all());
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(pca_features(RowMatrix::Zero(3, 4), 0), InvalidArgument);
    CHECK_THROWS_AS(kmeans_features(RowMatrix::Zero(2, 4), 3, 1), InsufficientData);
    CHECK_THROWS_AS(kmeans_features(RowMatrix::Zero(5, 4), 2, 1, 0), InvalidArgument);
  }
}
