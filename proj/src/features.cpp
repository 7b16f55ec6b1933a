#include "motionsm/features.hpp"

#include <cmath>

namespace motionsm {

namespace {

void check_pair(const Frame& x, const Frame& x_next) {
  if (x.size() != x_next.size()) {
    throw InvalidArgument("frame lengths differ: " + std::to_string(x.size()) + " vs " +
                          std::to_string(x_next.size()));
  }
  if (x.size() == 0) throw InvalidArgument("empty frame");
}

FeatureVector outer_vec(const Vector& left, const Vector& right) {
  const Eigen::Index n = left.size();
  FeatureVector chi(n * n);
  for (Eigen::Index i = 0; i < n; ++i) chi.segment(i * n, n) = left[i] * right;
  return chi;
}

}  // namespace

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Standard: return "standard";
    case FeatureKind::Midpoint: return "midpoint";
    case FeatureKind::Antisymmetric: return "antisymmetric";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::Standard, FeatureKind::Midpoint, FeatureKind::Antisymmetric})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown feature kind '" + s + "'");
}

FeatureVector feature_standard(const Frame& x, const Frame& x_next) {
  check_pair(x, x_next);
  return outer_vec(x_next - x, x);
}

FeatureVector feature_midpoint(const Frame& x, const Frame& x_next) {
  check_pair(x, x_next);
  return outer_vec(x_next + x, x_next - x);
}

FeatureVector feature_antisymmetric(const Frame& x, const Frame& x_next) {
  check_pair(x, x_next);
  return outer_vec(x_next, x) - outer_vec(x, x_next);
}

FeatureVector make_feature(FeatureKind kind, const Frame& x, const Frame& x_next) {
  switch (kind) {
    case FeatureKind::Standard: return feature_standard(x, x_next);
    case FeatureKind::Midpoint: return feature_midpoint(x, x_next);
    case FeatureKind::Antisymmetric: return feature_antisymmetric(x, x_next);
  }
  throw InvalidArgument("unknown feature kind");
}

FeatureVector vec(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("vec expects a square matrix");
  const Eigen::Index n = m.rows();
  FeatureVector v(n * n);
  for (Eigen::Index i = 0; i < n; ++i) v.segment(i * n, n) = m.row(i).transpose();
  return v;
}

Matrix unvec(const FeatureVector& v, int n) {
  if (v.size() != static_cast<Eigen::Index>(n) * n) throw InvalidArgument("unvec: size is not n*n");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.row(i) = v.segment(static_cast<Eigen::Index>(i) * n, n).transpose();
  return m;
}

int side_of(Eigen::Index size) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(size))));
  if (n * n != size) throw InvalidArgument("length " + std::to_string(size) + " is not a perfect square");
  return static_cast<int>(n);
}

}  // namespace motionsm
