#pragma once

#include <cstdint>
#include <string>

#include "motionsm/core.hpp"

namespace motionsm {

/// Symmetric (ZCA) whitening fitted once on a training prefix, then frozen.
struct WhiteningTransform {
  Vector mean;
  Matrix matrix;
  /// Absolute eigenvalue floor actually used.
  double epsilon = 0.0;
  /// Fingerprint of the fitting set.
  std::uint64_t fit_hash = 0;

  int size() const { return static_cast<int>(mean.size()); }
  static WhiteningTransform identity(int n);
};

enum class EpsilonScale {
  Absolute,
  /// epsilon is multiplied by the largest covariance eigenvalue.
  RelativeToLargest,
};

/// Fits mean and C^{-1/2} on the rows of `frames`. Eigenvalues are clamped
/// at zero before the floor; a component whose floored eigenvalue is still
/// zero is dropped (mapped to 0).
WhiteningTransform fit_zca(const RowMatrix& frames, double epsilon,
                           EpsilonScale scale = EpsilonScale::Absolute);

Frame apply(const WhiteningTransform& transform, const Frame& frame);
/// Whitens every row.
RowMatrix apply_rows(const WhiteningTransform& transform, const RowMatrix& frames);

}  // namespace motionsm
