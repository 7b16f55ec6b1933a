#pragma once

// Outer-product features built from a pair of consecutive frames.
//
// Index convention (shared by every module): for an n x n matrix F the
// feature entry alpha = i * n + j (0-based) holds F(i, j), i.e. row-major
// vectorisation.

#include <string>

#include "motionsm/core.hpp"

namespace motionsm {

using FeatureVector = Vector;

enum class FeatureKind {
  /// vec(dx x^T), dx = x_next - x.
  Standard,
  /// vec((x_next + x) dx^T): odd under time reversal.
  Midpoint,
  /// vec(x_next x^T - x x_next^T): odd in time and in indices.
  Antisymmetric,
};

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

FeatureVector feature_standard(const Frame& x, const Frame& x_next);
FeatureVector feature_midpoint(const Frame& x, const Frame& x_next);
FeatureVector feature_antisymmetric(const Frame& x, const Frame& x_next);
FeatureVector make_feature(FeatureKind kind, const Frame& x, const Frame& x_next);

FeatureVector vec(const Matrix& m);
Matrix unvec(const FeatureVector& v, int n);

/// n such that n * n == size; throws if size is not a perfect square.
int side_of(Eigen::Index size);

}  // namespace motionsm
