#pragma once

// Offline oracles on a population of features (one feature per row):
// uncentered PCA and K-means with k-means++ seeding.

#include <cstdint>
#include <string>
#include <vector>

#include "motionsm/core.hpp"

namespace motionsm {

struct PcaResult {
  /// K x d, orthonormal rows; the largest-magnitude entry of each row is positive.
  RowMatrix components;
  /// Descending second-moment eigenvalues.
  Vector eigenvalues;
  int rank = 0;
  std::vector<std::string> warnings;
};

/// Top-K eigenvectors of the uncentered second moment X^T X / N.
PcaResult pca_features(const RowMatrix& features, int K);

/// Mean reconstruction error (1/N) sum_t ||chi_t - A^T A chi_t||^2 for a
/// K x d frame A with orthonormal rows.
double pca_objective(const RowMatrix& features, const RowMatrix& frame);

struct KmeansResult {
  RowMatrix centroids;
  std::vector<int> assignments;
  double inertia = 0.0;
  /// Inertia after every assignment step.
  std::vector<double> inertia_history;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;

  /// N x K hard-assignment indicator.
  RowMatrix one_hot() const;
};

KmeansResult kmeans_features(const RowMatrix& features, int K, std::uint64_t seed, int max_iter = 100);

}  // namespace motionsm
