#include "motionsm/detector.hpp"

#include <cmath>
#include <future>
#include <numbers>

#include "motionsm/stimuli.hpp"

namespace motionsm {

namespace {

void check_frames(const Frame& x, const Frame& x_next) {
  if (x.size() != x_next.size()) throw InvalidArgument("frame lengths differ");
  if (x.size() < 3) throw InvalidArgument("frames need at least 3 pixels");
}

void check_time(const RowMatrix& stream, int t, int tau) {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (t - tau < 0 || t >= stream.rows()) {
    throw OutOfRange("time " + std::to_string(t) + " with delay " + std::to_string(tau) + " outside stream of " +
                     std::to_string(stream.rows()) + " frames");
  }
}

SweepPoint evaluate_point(DetectorKind detector, GratingParams p, SweepAxis axis, double value, bool keep_series) {
  switch (axis) {
    case SweepAxis::Contrast:
      p.contrast = value;
      break;
    case SweepAxis::Velocity:
      p.temporal_frequency = value / p.wavelength;
      break;
    case SweepAxis::Wavelength:
      p.wavelength = value;
      break;
  }
  const FrameSequence g = generate_grating(p.n, p.wavelength, p.temporal_frequency, p.contrast, p.steps, p.phase0);
  SweepPoint pt;
  pt.value = value;
  pt.contrast = p.contrast;
  pt.wavelength = p.wavelength;
  pt.temporal_frequency = p.temporal_frequency;
  pt.velocity = p.temporal_frequency * p.wavelength;
  Vector series = summed_output(detector, g.frames, p.tau);
  pt.mean = series.mean();
  pt.oscillation = dominant_frequency(series);
  if (keep_series) pt.series = std::move(series);
  return pt;
}

}  // namespace

Matrix cartoon_matrix(int n) {
  if (n < 3) throw InvalidArgument("cartoon matrix needs n >= 3");
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 0.5;
    a(i + 1, i) = -0.5;
  }
  return a;
}

double velocity_estimate(const Frame& x, const Frame& x_next, double lambda) {
  check_frames(x, x_next);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  const Vector spatial = cartoon_matrix(static_cast<int>(x.size())) * x;
  return -(x_next - x).dot(spatial) / lambda;
}

double velocity_regression(const Frame& x, const Frame& x_next, double lambda) {
  check_frames(x, x_next);
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  const Vector spatial = cartoon_matrix(static_cast<int>(x.size())) * x;
  return -(x_next - x).dot(spatial) / (spatial.squaredNorm() + lambda);
}

double hrd_local(const RowMatrix& stream, int i, int t, int tau) {
  check_time(stream, t, tau);
  if (i < 0 || i + 1 >= stream.cols()) throw OutOfRange("HR pixel pair " + std::to_string(i) + " out of range");
  return stream(t - tau, i + 1) * stream(t, i) - stream(t - tau, i) * stream(t, i + 1);
}

double cartoon_local(const RowMatrix& stream, int i, int t, int tau) {
  check_time(stream, t, tau);
  if (i < 1 || i + 1 >= stream.cols()) throw OutOfRange("cartoon pixel " + std::to_string(i) + " out of range");
  return (stream(t, i) - stream(t - tau, i)) * (stream(t, i + 1) - stream(t, i - 1));
}

EquivalenceReport global_equivalence_check(const RowMatrix& stream, int tau, int first, int last) {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (stream.rows() <= tau) throw InsufficientData("stream shorter than the delay");
  if (first < 1 || last <= first || last + 1 >= stream.cols()) {
    throw OutOfRange("summation range [" + std::to_string(first) + ", " + std::to_string(last) +
                     "] needs one spare pixel on each side");
  }
  EquivalenceReport r;
  r.tau = tau;
  r.first = first;
  r.last = last;
  const Eigen::Index count = stream.rows() - tau;
  r.lhs.resize(count);
  r.rhs.resize(count);
  r.boundary.resize(count);
  r.residual.resize(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const int t = static_cast<int>(k) + tau;
    double lhs = 0.0;
    double magnitude = 0.0;
    for (int i = first; i <= last; ++i) {
      const double y = cartoon_local(stream, i, t, tau);
      lhs += y;
      magnitude += std::abs(y);
    }
    double hr = 0.0;
    for (int i = first; i < last; ++i) {
      const double h = hrd_local(stream, i, t, tau);
      hr += h;
      magnitude += std::abs(h);
    }
    const double edge[4] = {
        stream(t - tau, first) * stream(t, first - 1),
        -stream(t - tau, last) * stream(t, last + 1),
        -stream(t, first) * stream(t, first - 1),
        stream(t, last) * stream(t, last + 1),
    };
    double boundary = 0.0;
    for (double e : edge) {
      boundary += e;
      magnitude += std::abs(e);
    }
    r.lhs[k] = lhs;
    r.rhs[k] = hr + boundary;
    r.boundary[k] = boundary;
    r.residual[k] = std::abs(lhs - r.rhs[k]);
    r.scale = std::max(r.scale, magnitude);
  }
  r.max_residual = count > 0 ? r.residual.maxCoeff() : 0.0;
  r.max_relative = r.scale > 0.0 ? r.max_residual / r.scale : r.max_residual;
  return r;
}

EquivalenceReport global_equivalence_check_periodic(const RowMatrix& stream, int tau) {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (stream.rows() <= tau) throw InsufficientData("stream shorter than the delay");
  const int n = static_cast<int>(stream.cols());
  if (n < 3) throw InvalidArgument("periodic field needs at least 3 pixels");
  EquivalenceReport r;
  r.tau = tau;
  r.first = 0;
  r.last = n - 1;
  r.periodic = true;
  const Eigen::Index count = stream.rows() - tau;
  r.lhs.resize(count);
  r.rhs.resize(count);
  r.boundary = Vector::Zero(count);
  r.residual.resize(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index t = k + tau;
    const Eigen::Index s = t - tau;
    double lhs = 0.0;
    double hr = 0.0;
    double magnitude = 0.0;
    for (int i = 0; i < n; ++i) {
      const int left = (i + n - 1) % n;
      const int right = (i + 1) % n;
      const double y = (stream(t, i) - stream(s, i)) * (stream(t, right) - stream(t, left));
      const double h = stream(s, right) * stream(t, i) - stream(s, i) * stream(t, right);
      lhs += y;
      hr += h;
      magnitude += std::abs(y) + std::abs(h);
    }
    r.lhs[k] = lhs;
    r.rhs[k] = hr;
    r.residual[k] = std::abs(lhs - hr);
    r.scale = std::max(r.scale, magnitude);
  }
  r.max_residual = count > 0 ? r.residual.maxCoeff() : 0.0;
  r.max_relative = r.scale > 0.0 ? r.max_residual / r.scale : r.max_residual;
  return r;
}

std::string to_string(DetectorKind kind) { return kind == DetectorKind::Hrd ? "hrd" : "cartoon"; }

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Contrast:
      return "contrast";
    case SweepAxis::Velocity:
      return "velocity";
    case SweepAxis::Wavelength:
      return "wavelength";
  }
  return "contrast";
}

DetectorKind detector_kind_from_string(const std::string& s) {
  if (s == "cartoon") return DetectorKind::Cartoon;
  if (s == "hrd") return DetectorKind::Hrd;
  throw InvalidArgument("unknown detector '" + s + "'");
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "contrast") return SweepAxis::Contrast;
  if (s == "velocity") return SweepAxis::Velocity;
  if (s == "wavelength") return SweepAxis::Wavelength;
  throw InvalidArgument("unknown sweep axis '" + s + "'");
}

Vector summed_output(DetectorKind kind, const RowMatrix& stream, int tau) {
  if (tau < 1) throw InvalidArgument("tau must be >= 1");
  if (stream.rows() <= tau) throw InsufficientData("stream shorter than the delay");
  if (stream.cols() < 3) throw InvalidArgument("field needs at least 3 pixels");
  const int n = static_cast<int>(stream.cols());
  Vector out(stream.rows() - tau);
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const int t = static_cast<int>(k) + tau;
    double sum = 0.0;
    if (kind == DetectorKind::Cartoon) {
      for (int i = 1; i + 1 < n; ++i) sum += cartoon_local(stream, i, t, tau);
    } else {
      for (int i = 0; i + 1 < n; ++i) sum += hrd_local(stream, i, t, tau);
    }
    out[k] = sum;
  }
  return out;
}

DominantFrequency dominant_frequency(const Vector& series) {
  const Eigen::Index n = series.size();
  if (n < 4) throw InsufficientData("series too short for spectral analysis");
  const Vector centred = series.array() - series.mean();
  DominantFrequency best;
  best.resolution = 1.0 / static_cast<double>(n);
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(k * t % n) / static_cast<double>(n);
      re += centred[t] * std::cos(phase);
      im -= centred[t] * std::sin(phase);
    }
    const double amp = std::hypot(re, im) / static_cast<double>(n);
    if (amp > best.amplitude) {
      best.amplitude = amp;
      best.frequency = static_cast<double>(k) / static_cast<double>(n);
    }
  }
  return best;
}

TuningCurve tuning_sweep(DetectorKind detector, const GratingParams& base, SweepAxis axis,
                         const std::vector<double>& values, bool keep_series) {
  if (values.size() < 2) throw InvalidArgument("a sweep needs at least two points");
  TuningCurve curve;
  curve.detector = detector;
  curve.axis = axis;
  std::vector<std::future<SweepPoint>> jobs;
  jobs.reserve(values.size());
  for (double v : values) {
    jobs.push_back(std::async(std::launch::async, evaluate_point, detector, base, axis, v, keep_series));
  }
  for (auto& job : jobs) curve.points.push_back(job.get());
  return curve;
}

RowMatrix mirror(const RowMatrix& stream) { return stream.rowwise().reverse(); }

}  // namespace motionsm
