#pragma once

// Fixed-form motion detectors: the three-pixel cartoon model, the regression
// velocity estimator built on it, the Hassenstein-Reichardt correlator and
// the exact identity linking the summed cartoon output to summed HR output.
//
// Streams are T x n row-major matrices (one frame per row); pixel and time
// indices are 0-based.

#include <string>
#include <vector>

#include "motionsm/core.hpp"

namespace motionsm {

/// n x n with (i, i+1) = +1/2 and (i+1, i) = -1/2: A x is the central
/// spatial difference of x.
Matrix cartoon_matrix(int n);

/// Approximate regression estimate -(x_next - x)^T A x / lambda. Positive for
/// motion toward increasing pixel index.
double velocity_estimate(const Frame& x, const Frame& x_next, double lambda = 1.0);

/// Exact least-squares estimate -(x_next - x)^T A x / (||A x||^2 + lambda).
double velocity_regression(const Frame& x, const Frame& x_next, double lambda = 1.0);

/// HR(i, t) = x_{i+1}(t - tau) x_i(t) - x_i(t - tau) x_{i+1}(t).
double hrd_local(const RowMatrix& stream, int i, int t, int tau);

/// y_i(t) = (x_i(t) - x_i(t - tau)) (x_{i+1}(t) - x_{i-1}(t)).
double cartoon_local(const RowMatrix& stream, int i, int t, int tau);

struct EquivalenceReport {
  int tau = 1;
  int first = 0;
  int last = 0;
  bool periodic = false;
  /// Per t = tau .. T-1.
  Vector lhs;
  Vector rhs;
  Vector boundary;
  Vector residual;
  double max_residual = 0.0;
  /// Largest sum of absolute term magnitudes over t; residuals are relative to it.
  double scale = 0.0;
  double max_relative = 0.0;
};

/// Compares sum_{i=first..last} y_i(t) with sum_{i=first..last-1} HR(i, t)
/// plus the four edge terms
///   x_first(t-tau) x_{first-1}(t) - x_last(t-tau) x_{last+1}(t)
///   - x_first(t) x_{first-1}(t) + x_last(t) x_{last+1}(t).
/// Requires 1 <= first < last <= n - 2.
EquivalenceReport global_equivalence_check(const RowMatrix& stream, int tau, int first, int last);

/// Periodic field: both sums run over every pixel with wrapped indices and
/// the edge terms vanish identically.
EquivalenceReport global_equivalence_check_periodic(const RowMatrix& stream, int tau);

enum class DetectorKind { Cartoon, Hrd };
enum class SweepAxis { Contrast, Velocity, Wavelength };

std::string to_string(DetectorKind kind);
std::string to_string(SweepAxis axis);
DetectorKind detector_kind_from_string(const std::string& s);
SweepAxis sweep_axis_from_string(const std::string& s);

/// Field-summed instantaneous output for t = tau .. T-1: cartoon over pixels
/// 1..n-2, HR over pairs 0..n-2.
Vector summed_output(DetectorKind kind, const RowMatrix& stream, int tau);

struct DominantFrequency {
  /// cycles/step
  double frequency = 0.0;
  double amplitude = 0.0;
  /// DFT bin width 1/N.
  double resolution = 0.0;
};

/// Largest non-DC bin of a plain DFT of the mean-subtracted series.
DominantFrequency dominant_frequency(const Vector& series);

struct GratingParams {
  int n = 20;
  double wavelength = 8.0;
  double temporal_frequency = 0.05;
  double contrast = 1.0;
  int steps = 400;
  double phase0 = 0.0;
  int tau = 1;
};

struct SweepPoint {
  double value = 0.0;
  double contrast = 0.0;
  double wavelength = 0.0;
  double temporal_frequency = 0.0;
  double velocity = 0.0;
  double mean = 0.0;
  DominantFrequency oscillation;
  Vector series;
};

struct TuningCurve {
  DetectorKind detector = DetectorKind::Cartoon;
  SweepAxis axis = SweepAxis::Contrast;
  std::vector<SweepPoint> points;
};

/// Drifting gratings built from `base` with one parameter replaced by each
/// sweep value (velocity values are px/step, converted via f = v / lambda).
/// Points are evaluated in parallel and assembled in input order.
TuningCurve tuning_sweep(DetectorKind detector, const GratingParams& base, SweepAxis axis,
                         const std::vector<double>& values, bool keep_series = false);

/// Reverses pixel order in every frame.
RowMatrix mirror(const RowMatrix& stream);

}  // namespace motionsm
