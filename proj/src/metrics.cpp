#include "motionsm/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace motionsm {

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine of vectors with different lengths");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double cosine(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidArgument("cosine of matrices with different shapes");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return (a.array() * b.array()).sum() / (na * nb);
}

double toeplitz_shift_score(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols() || n < 4) throw InvalidArgument("Toeplitz score needs a square matrix with n >= 4");
  double score = 1.0;
  for (Eigen::Index r = 1; r + 2 < n; ++r) {
    const Vector upper = a.row(r).segment(0, n - 1).transpose();
    const Vector lower = a.row(r + 1).segment(1, n - 1).transpose();
    score = std::min(score, cosine(upper, lower));
  }
  return score;
}

double antisymmetry_ratio(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("antisymmetry ratio needs a square matrix");
  const double norm = a.norm();
  if (norm == 0.0) return 0.0;
  return (a + a.transpose()).norm() / norm;
}

Vector principal_angles(const RowMatrix& u, const RowMatrix& v) {
  if (u.cols() != v.cols()) throw InvalidArgument("subspaces live in different dimensions");
  if (u.rows() == 0 || v.rows() == 0) throw InvalidArgument("empty subspace");
  const Eigen::Index ku = u.rows();
  const Eigen::Index kv = v.rows();
  Eigen::HouseholderQR<Matrix> qu(u.transpose());
  Eigen::HouseholderQR<Matrix> qv(v.transpose());
  const Matrix q1 = qu.householderQ() * Matrix::Identity(u.cols(), ku);
  const Matrix q2 = qv.householderQ() * Matrix::Identity(v.cols(), kv);
  Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
  const Vector s = svd.singularValues();
  Vector angles(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) angles[i] = std::acos(std::clamp(s[i], -1.0, 1.0));
  std::sort(angles.begin(), angles.end());
  return angles;
}

namespace {

Matrix derivative(int side, bool along_x) {
  if (side < 3) throw InvalidArgument("patch side must be >= 3");
  const int d = side * side;
  Matrix m = Matrix::Zero(d, d);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      const int p = row * side + col;
      const int pos = along_x ? col : row;
      const int step = along_x ? 1 : side;
      if (pos + 1 < side) m(p, p + step) = 0.5;
      if (pos >= 1) m(p, p - step) = -0.5;
    }
  }
  return m;
}

}  // namespace

Matrix derivative_x(int side) { return derivative(side, true); }
Matrix derivative_y(int side) { return derivative(side, false); }

Matrix rotation_generator(int side) {
  const int d = side * side;
  Vector xs(d);
  Vector ys(d);
  const double c = 0.5 * (side - 1);
  for (int row = 0; row < side; ++row) {
    for (int col = 0; col < side; ++col) {
      xs[row * side + col] = col - c;
      ys[row * side + col] = row - c;
    }
  }
  return ys.asDiagonal() * derivative_x(side) - xs.asDiagonal() * derivative_y(side);
}

Matrix translation_generator(int side, int axis, int sign) {
  if (axis != 0 && axis != 1) throw InvalidArgument("axis must be 0 (x) or 1 (y)");
  if (sign != 1 && sign != -1) throw InvalidArgument("sign must be +1 or -1");
  return -static_cast<double>(sign) * (axis == 0 ? derivative_x(side) : derivative_y(side));
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidArgument("correlation needs equal-length vectors");
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return cosine(ca, cb);
}

}  // namespace motionsm
