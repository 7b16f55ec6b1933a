#pragma once

// Comparison metrics between learned operators, oracle operators and
// analytic generators.

#include "motionsm/core.hpp"

namespace motionsm {

/// Cosine similarity; 0 if either argument is zero.
double cosine(const Vector& a, const Vector& b);
double cosine(const Matrix& a, const Matrix& b);

/// Minimum over consecutive interior row pairs (r, r+1), r = 1 .. n-3, of the
/// cosine between row r and row r+1 shifted back by one column.
double toeplitz_shift_score(const Matrix& a);

/// ||A + A^T||_F / ||A||_F.
double antisymmetry_ratio(const Matrix& a);

/// Principal angles (radians, ascending) between the row spans of u and v.
Vector principal_angles(const RowMatrix& u, const RowMatrix& v);

/// Central-difference derivative along x (columns) or y (rows) of a
/// side x side patch flattened row-major; one-sided terms at the border are
/// dropped, as in the 1D cartoon matrix.
Matrix derivative_x(int side);
Matrix derivative_y(int side);

/// Generator of counter-clockwise rotation about the patch centre:
/// diag(y) Dx - diag(x) Dy with x = col - (side-1)/2, y = row - (side-1)/2.
Matrix rotation_generator(int side);

/// Generator of translation by +1 px along x (axis 0) or y (axis 1), with sign
/// selecting the direction: -sign * D.
Matrix translation_generator(int side, int axis, int sign);

double pearson(const Vector& a, const Vector& b);

}  // namespace motionsm
