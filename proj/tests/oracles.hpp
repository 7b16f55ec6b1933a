#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library under test: plain loops, a cyclic Jacobi eigen
// solver, modified Gram-Schmidt and closed-form grating responses.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major, m[r][c]

inline Mat zeros(int r, int c) { return Mat(r, Vec(c, 0.0)); }

inline Mat eye(int n) {
  Mat m = zeros(n, n);
  for (int i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double cosine(const Vec& a, const Vec& b) { return dot(a, b) / (norm(a) * norm(b)); }

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c = zeros(static_cast<int>(a.size()), static_cast<int>(b[0].size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat transpose(const Mat& a) {
  Mat t = zeros(static_cast<int>(a[0].size()), static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Vec flatten(const Mat& m) {
  Vec v;
  for (const auto& row : m) v.insert(v.end(), row.begin(), row.end());
  return v;
}

// The n = 5 cartoon generator written out by hand: one half times the
// matrix with +1 above and -1 below the diagonal.
inline Mat cartoon_n5_by_hand() {
  const double h = 0.5;
  return {{0, +h, 0, 0, 0}, {-h, 0, +h, 0, 0}, {0, -h, 0, +h, 0}, {0, 0, -h, 0, +h}, {0, 0, 0, -h, 0}};
}

// chi_alpha = dx_i * x_j with alpha = i * n + j.
inline Vec feature_standard(const Vec& x, const Vec& xn) {
  const std::size_t n = x.size();
  Vec chi(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) chi[i * n + j] = (xn[i] - x[i]) * x[j];
  return chi;
}

inline Vec feature_midpoint(const Vec& x, const Vec& xn) {
  const std::size_t n = x.size();
  Vec chi(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) chi[i * n + j] = (xn[i] + x[i]) * (xn[j] - x[j]);
  return chi;
}

inline Vec feature_antisymmetric(const Vec& x, const Vec& xn) {
  const std::size_t n = x.size();
  Vec chi(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) chi[i * n + j] = xn[i] * x[j] - x[i] * xn[j];
  return chi;
}

// -(x_next - x)^T A x / lambda with A the central difference, by a double loop.
inline double velocity_estimate(const Vec& x, const Vec& xn, double lambda) {
  const int n = static_cast<int>(x.size());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double ax = 0.0;
    for (int j = 0; j < n; ++j) {
      double a = 0.0;
      if (j == i + 1) a = 0.5;
      if (j == i - 1) a = -0.5;
      ax += a * x[j];
    }
    s += (xn[i] - x[i]) * ax;
  }
  return -s / lambda;
}

// Cyclic Jacobi eigen-decomposition of a symmetric matrix. Returns
// eigenvalues in descending order and eigenvectors as the matching columns.
inline std::pair<Vec, Mat> jacobi_eigen(Mat a, int max_sweeps = 100) {
  const int n = static_cast<int>(a.size());
  Mat v = eye(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
  Vec values(n);
  Mat vectors = zeros(n, n);
  for (int k = 0; k < n; ++k) {
    values[k] = a[order[k]][order[k]];
    for (int r = 0; r < n; ++r) vectors[r][k] = v[r][order[k]];
  }
  return {values, vectors};
}

// Top-K eigenvectors (rows) of X^T X / N, sign fixed so the largest-magnitude
// entry is positive.
inline Mat pca_rows(const Mat& x, int k) {
  const int d = static_cast<int>(x[0].size());
  Mat s = zeros(d, d);
  for (const auto& row : x)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s[i][j] += row[i] * row[j] / static_cast<double>(x.size());
  const auto [values, vectors] = jacobi_eigen(s);
  Mat out;
  for (int c = 0; c < k; ++c) {
    Vec v(d);
    int arg = 0;
    for (int r = 0; r < d; ++r) {
      v[r] = vectors[r][c];
      if (std::abs(v[r]) > std::abs(v[arg])) arg = r;
    }
    if (v[arg] < 0)
      for (double& e : v) e = -e;
    out.push_back(v);
  }
  return out;
}

// Orthonormal basis of the row span by modified Gram-Schmidt.
inline Mat mgs(const Mat& rows) {
  Mat q;
  for (Vec v : rows) {
    for (const auto& u : q) {
      const double p = dot(u, v);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= p * u[i];
    }
    const double nv = norm(v);
    if (nv > 1e-12) {
      for (double& e : v) e /= nv;
      q.push_back(v);
    }
  }
  return q;
}

// Principal angles (degrees, ascending) from the eigenvalues of C C^T, where
// C holds the inner products between the two orthonormal bases.
inline Vec principal_angles_deg(const Mat& u, const Mat& v) {
  const Mat qu = mgs(u);
  const Mat qv = mgs(v);
  Mat c = zeros(static_cast<int>(qu.size()), static_cast<int>(qv.size()));
  for (std::size_t i = 0; i < qu.size(); ++i)
    for (std::size_t j = 0; j < qv.size(); ++j) c[i][j] = dot(qu[i], qv[j]);
  const Mat cct = matmul(c, transpose(c));
  const auto values = jacobi_eigen(cct).first;
  const std::size_t k = std::min(qu.size(), qv.size());
  Vec angles;
  for (std::size_t i = 0; i < k; ++i) {
    const double cs = std::sqrt(std::clamp(values[i], 0.0, 1.0));
    angles.push_back(std::acos(std::min(cs, 1.0)) * 180.0 / std::numbers::pi);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

// Closed forms for the grating x_i(t) = c sin(k i - w t + phi), k = 2 pi / lambda,
// w = 2 pi f. Both local detector outputs average to -c^2 sin k sin(w tau) per
// unit (HR is exactly constant in t).
inline double hr_on_grating(double c, double lambda, double f, int tau) {
  const double k = 2.0 * std::numbers::pi / lambda;
  const double w = 2.0 * std::numbers::pi * f;
  return -c * c * std::sin(k) * std::sin(w * tau);
}

// Instantaneous cartoon output at pixel i:
// y = (x_i(t) - x_i(t-tau)) (x_{i+1}(t) - x_{i-1}(t)), expanded.
inline double cartoon_on_grating(double c, double lambda, double f, int tau, int i, int t, double phi) {
  const double k = 2.0 * std::numbers::pi / lambda;
  const double w = 2.0 * std::numbers::pi * f;
  const double alpha = k * i - w * t + phi;
  const double dt = 2.0 * c * std::cos(alpha + 0.5 * w * tau) * std::sin(-0.5 * w * tau);
  const double dx = 2.0 * c * std::cos(alpha) * std::sin(k);
  return dt * dx;
}

// Temporal frequency maximising the time-averaged output: sin(2 pi f tau) peaks
// at f = 1 / (4 tau), independent of the spatial wavelength.
inline double optimal_temporal_frequency(int tau) { return 1.0 / (4.0 * tau); }

// First-order discrepancy between the standard and midpoint projections on
// an operator B for x_next = x + theta G x: the midpoint projection <B^T / 2, mid>
// equals the standard one up to theta^2 x^T G^T B G x / 2.
inline double midpoint_discrepancy(const Mat& b, const Mat& g, const Vec& x, double theta) {
  const int n = static_cast<int>(x.size());
  Vec gx(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gx[i] += g[i][j] * x[j];
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += gx[i] * b[i][j] * gx[j];
  return 0.5 * theta * theta * s;
}

// Bilinear sample of img at (x, y) = (column, row), zero outside.
inline double bilinear(const Mat& img, double x, double y) {
  const int rows = static_cast<int>(img.size());
  const int cols = static_cast<int>(img[0].size());
  const int c0 = static_cast<int>(std::floor(x));
  const int r0 = static_cast<int>(std::floor(y));
  const double ax = x - c0;
  const double ay = y - r0;
  auto at = [&](int r, int c) { return r < 0 || c < 0 || r >= rows || c >= cols ? 0.0 : img[r][c]; };
  return (1 - ax) * (1 - ay) * at(r0, c0) + ax * (1 - ay) * at(r0, c0 + 1) + (1 - ax) * ay * at(r0 + 1, c0) +
         ax * ay * at(r0 + 1, c0 + 1);
}

}  // namespace oracle
