#include "motionsm/stimuli.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace motionsm {

namespace {

constexpr double kMaxRho = 1.0 - 1e-12;

int aperture_radius(double sigma) { return sigma > 0.0 ? static_cast<int>(std::ceil(5.0 * sigma)) : 0; }

double gaussian_weight(double d, double sigma) { return std::exp(-0.5 * d * d / (sigma * sigma)); }

double world_at(const World1D& world, long k, Boundary boundary) {
  const long len = world.length();
  if (boundary == Boundary::Periodic) {
    k %= len;
    if (k < 0) k += len;
  } else if (k < 0 || k >= len) {
    throw OutOfRange("world sample " + std::to_string(k) + " outside [0, " + std::to_string(len) + ")");
  }
  return world.intensities[k];
}

double sample_point(const World1D& world, double pos, const Sampler& sampler) {
  if (sampler.aperture_sigma > 0.0) {
    const double sigma = sampler.aperture_sigma;
    const int radius = aperture_radius(sigma);
    const long centre = std::lround(pos);
    double acc = 0.0;
    for (long k = centre - radius; k <= centre + radius; ++k) {
      acc += world_at(world, k, sampler.boundary) * gaussian_weight(pos - static_cast<double>(k), sigma);
    }
    return acc / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  }
  const double fl = std::floor(pos);
  const long k = static_cast<long>(fl);
  const double frac = pos - fl;
  const double left = world_at(world, k, sampler.boundary);
  if (frac == 0.0) return left;
  return (1.0 - frac) * left + frac * world_at(world, k + 1, sampler.boundary);
}

double image_at(const RowMatrix& image, long r, long c) {
  if (r < 0 || c < 0 || r >= image.rows() || c >= image.cols()) {
    throw OutOfRange("2D sample outside the seed image");
  }
  return image(r, c);
}

double sample_image(const RowMatrix& image, double x, double y, double sigma) {
  if (sigma > 0.0) {
    const int radius = aperture_radius(sigma);
    const long cx = std::lround(x);
    const long cy = std::lround(y);
    double acc = 0.0;
    for (long r = cy - radius; r <= cy + radius; ++r) {
      const double wy = gaussian_weight(y - static_cast<double>(r), sigma);
      for (long c = cx - radius; c <= cx + radius; ++c) {
        acc += image_at(image, r, c) * wy * gaussian_weight(x - static_cast<double>(c), sigma);
      }
    }
    return acc / (2.0 * std::numbers::pi * sigma * sigma);
  }
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const long c = static_cast<long>(fx);
  const long r = static_cast<long>(fy);
  const double ax = x - fx;
  const double ay = y - fy;
  double acc = 0.0;
  const double wts[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  const long rr[4] = {r, r, r + 1, r + 1};
  const long cc[4] = {c, c + 1, c, c + 1};
  for (int q = 0; q < 4; ++q) {
    if (wts[q] != 0.0) acc += wts[q] * image_at(image, rr[q], cc[q]);
  }
  return acc;
}

RowMatrix gaussian_image(int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrix image(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) image(r, c) = normal(rng);
  return image;
}

FrameSequence generate_world_sequence(const StimulusSpec& spec, int steps, std::uint64_t seed) {
  FrameSequence seq;
  seq.spec = spec;
  seq.ground_truth = realize_program(spec.motion, steps - 1, 1, derive_seed(seed, 1));

  // Cumulative image displacement relative to the first frame.
  std::vector<double> path(steps, 0.0);
  for (int t = 1; t < steps; ++t) path[t] = path[t - 1] + seq.ground_truth(t - 1, 0);
  const auto [lo_it, hi_it] = std::minmax_element(path.begin(), path.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  const int margin = aperture_radius(spec.aperture_sigma) + 2;
  const int needed = static_cast<int>(std::ceil(hi - lo)) + spec.n + 2 * margin;
  int length = spec.world_length;
  if (length <= 0) length = std::max(64 * spec.n, needed);
  if (spec.boundary == Boundary::WindowOnLargerWorld && needed > length) {
    throw OutOfRange("cumulative displacement exceeds the world (needs " + std::to_string(needed) +
                     " samples, world has " + std::to_string(length) + ")");
  }
  const World1D world = generate_world_1d(length, spec.correlation_length, derive_seed(seed, 0));
  // Positive displacement moves the image toward increasing pixel index, so
  // the window slides the other way over the world.
  const double start = spec.boundary == Boundary::Periodic ? 0.0 : static_cast<double>(margin) + hi;

  const Sampler sampler{spec.aperture_sigma, spec.boundary};
  seq.frames.resize(steps, spec.n);
  for (int t = 0; t < steps; ++t) {
    seq.frames.row(t) = spec.contrast * sample_window(world, start - path[t], spec.n, sampler).transpose();
  }
  return seq;
}

FrameSequence generate_image_sequence(const StimulusSpec& spec, int steps, std::uint64_t seed) {
  FrameSequence seq;
  seq.spec = spec;
  const bool rotation = spec.transform == Transform2D::Rotation;
  seq.ground_truth = realize_program(spec.motion, steps - 1, rotation ? 1 : 2, derive_seed(seed, 1));

  double angle = 0.0, dx = 0.0, dy = 0.0;
  double max_shift = 0.0;
  for (int t = 0; t + 1 < steps; ++t) {
    if (!rotation) {
      dx += seq.ground_truth(t, 0);
      dy += seq.ground_truth(t, 1);
      max_shift = std::max({max_shift, std::abs(dx), std::abs(dy)});
    }
  }
  // Seed image: 3n x 3n plus room for the aperture and the cumulative shift.
  const int margin = aperture_radius(spec.aperture_sigma) + 1;
  const int side = 3 * spec.n + 2 * (margin + static_cast<int>(std::ceil(max_shift)));
  const RowMatrix image = gaussian_image(side, derive_seed(seed, 0));
  const double centre = 0.5 * (side - 1);

  seq.frames.resize(steps, spec.n * spec.n);
  dx = dy = 0.0;
  for (int t = 0; t < steps; ++t) {
    seq.frames.row(t) =
        spec.contrast * sample_patch(image, centre, centre, spec.n, angle, dx, dy, spec.aperture_sigma).transpose();
    if (t + 1 < steps) {
      if (rotation) {
        angle += seq.ground_truth(t, 0);
      } else {
        dx += seq.ground_truth(t, 0);
        dy += seq.ground_truth(t, 1);
      }
    }
  }
  return seq;
}

void validate(const StimulusSpec& spec) {
  if (spec.n < 3) throw InvalidArgument("window size n must be >= 3");
  if (!(spec.contrast >= 0.0) || !std::isfinite(spec.contrast)) throw InvalidArgument("contrast must be finite and >= 0");
  if (spec.aperture_sigma < 0.0) throw InvalidArgument("aperture_sigma must be >= 0");
  if (spec.kind == StimulusKind::NoiseWorld1D && !(spec.correlation_length > 0.0)) {
    throw InvalidArgument("correlation_length must be > 0");
  }
}

}  // namespace

int StimulusSpec::program_axes() const {
  return kind == StimulusKind::NoiseImage2D && transform == Transform2D::Translation ? 2 : 1;
}

int StimulusSpec::frame_size() const { return kind == StimulusKind::NoiseImage2D ? n * n : n; }

std::string to_string(StimulusKind kind) {
  switch (kind) {
    case StimulusKind::NoiseWorld1D: return "noise_world_1d";
    case StimulusKind::SineGrating1D: return "sine_grating_1d";
    case StimulusKind::NoiseImage2D: return "noise_image_2d";
  }
  return "?";
}

std::string to_string(Boundary boundary) {
  return boundary == Boundary::Periodic ? "periodic" : "window_on_larger_world";
}

std::string to_string(Transform2D transform) {
  return transform == Transform2D::Rotation ? "rotation" : "translation";
}

std::string to_string(MotionType type) {
  switch (type) {
    case MotionType::Static: return "static";
    case MotionType::Constant: return "constant";
    case MotionType::UniformJitter: return "uniform_jitter";
    case MotionType::RandomSign: return "random_sign";
    case MotionType::Telegraph: return "telegraph";
    case MotionType::Cardinal: return "cardinal";
    case MotionType::Explicit: return "explicit";
  }
  return "?";
}

StimulusKind stimulus_kind_from_string(const std::string& s) {
  for (auto k : {StimulusKind::NoiseWorld1D, StimulusKind::SineGrating1D, StimulusKind::NoiseImage2D})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown stimulus kind '" + s + "'");
}

Boundary boundary_from_string(const std::string& s) {
  for (auto b : {Boundary::WindowOnLargerWorld, Boundary::Periodic})
    if (to_string(b) == s) return b;
  throw InvalidArgument("unknown boundary '" + s + "'");
}

Transform2D transform_from_string(const std::string& s) {
  for (auto t : {Transform2D::Translation, Transform2D::Rotation})
    if (to_string(t) == s) return t;
  throw InvalidArgument("unknown 2D transform '" + s + "'");
}

MotionType motion_type_from_string(const std::string& s) {
  for (auto t : {MotionType::Static, MotionType::Constant, MotionType::UniformJitter, MotionType::RandomSign,
                 MotionType::Telegraph, MotionType::Cardinal, MotionType::Explicit})
    if (to_string(t) == s) return t;
  throw InvalidArgument("unknown motion type '" + s + "'");
}

World1D generate_world_1d(int length, double correlation_length, std::uint64_t seed) {
  if (length < 2) throw InvalidArgument("world length must be >= 2");
  if (!(correlation_length > 0.0)) throw InvalidArgument("correlation length must be > 0");
  const double rho = std::min(std::exp(-1.0 / correlation_length), kMaxRho);
  const double innovation = std::sqrt(1.0 - rho * rho);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  World1D world;
  world.correlation_length = correlation_length;
  world.seed = seed;
  world.intensities.resize(length);
  world.intensities[0] = normal(rng);  // stationary start
  for (int i = 1; i < length; ++i) world.intensities[i] = rho * world.intensities[i - 1] + innovation * normal(rng);
  return world;
}

Frame sample_window(const World1D& world, double position, int n, const Sampler& sampler) {
  if (n < 1) throw InvalidArgument("window size must be positive");
  if (!std::isfinite(position)) throw InvalidArgument("window position must be finite");
  if (sampler.boundary == Boundary::WindowOnLargerWorld) {
    const int radius = aperture_radius(sampler.aperture_sigma);
    if (position - radius < 0.0 || position + (n - 1) + radius > world.length() - 1) {
      throw OutOfRange("window exceeds world bounds");
    }
  }
  Frame frame(n);
  for (int i = 0; i < n; ++i) frame[i] = sample_point(world, position + i, sampler);
  return frame;
}

RowMatrix realize_program(const MotionSpec& motion, int steps, int axes, std::uint64_t seed) {
  if (steps < 0) throw InvalidArgument("negative program length");
  RowMatrix program = RowMatrix::Zero(steps, axes);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double a = motion.amplitude;
  // U(0, a]: never exactly zero so every step carries a direction.
  auto magnitude = [&] { return a * (1.0 - unit(rng)); };

  switch (motion.type) {
    case MotionType::Static:
      break;
    case MotionType::Constant:
      program.col(0).setConstant(a);
      break;
    case MotionType::UniformJitter:
      for (int t = 0; t < steps; ++t) program(t, 0) = a * (2.0 * unit(rng) - 1.0);
      break;
    case MotionType::RandomSign:
      for (int t = 0; t < steps; ++t) program(t, 0) = unit(rng) < 0.5 ? a : -a;
      break;
    case MotionType::Telegraph: {
      double sign = unit(rng) < 0.5 ? 1.0 : -1.0;
      for (int t = 0; t < steps; ++t) {
        if (unit(rng) < motion.flip_probability) sign = -sign;
        program(t, 0) = sign * magnitude();
      }
      break;
    }
    case MotionType::Cardinal: {
      if (axes != 2) throw InvalidArgument("cardinal motion needs a 2D translation stimulus");
      std::uniform_int_distribution<int> direction(0, 3);
      for (int t = 0; t < steps; ++t) {
        const int d = direction(rng);
        program(t, d / 2) = (d % 2 == 0 ? 1.0 : -1.0) * magnitude();
      }
      break;
    }
    case MotionType::Explicit:
      if (motion.values.rows() < steps || motion.values.cols() != axes) {
        throw InvalidArgument("explicit motion program has " + std::to_string(motion.values.rows()) + "x" +
                              std::to_string(motion.values.cols()) + " entries, need at least " +
                              std::to_string(steps) + "x" + std::to_string(axes));
      }
      program = motion.values.topRows(steps);
      break;
  }
  return program;
}

FrameSequence generate_sequence(const StimulusSpec& spec, int steps, std::uint64_t seed) {
  validate(spec);
  if (steps < 1) throw InvalidArgument("sequence needs at least one frame");
  switch (spec.kind) {
    case StimulusKind::NoiseWorld1D:
      return generate_world_sequence(spec, steps, seed);
    case StimulusKind::NoiseImage2D:
      return generate_image_sequence(spec, steps, seed);
    case StimulusKind::SineGrating1D: {
      FrameSequence seq = generate_grating(spec.n, spec.wavelength, spec.temporal_frequency, spec.contrast, steps,
                                           spec.phase0);
      seq.spec = spec;
      return seq;
    }
  }
  throw InvalidArgument("unknown stimulus kind");
}

std::vector<FrameSequence> generate_episodes(const StimulusSpec& spec, int episodes, int steps,
                                             std::uint64_t seed) {
  if (episodes < 1) throw InvalidArgument("need at least one episode");
  std::vector<FrameSequence> out;
  out.reserve(episodes);
  for (int e = 0; e < episodes; ++e) out.push_back(generate_sequence(spec, steps, derive_seed(seed, 1000 + e)));
  return out;
}

FrameSequence generate_grating(int n, double wavelength, double temporal_frequency, double contrast, int steps,
                               double phase0) {
  if (n < 1) throw InvalidArgument("grating needs at least one pixel");
  if (steps < 1) throw InvalidArgument("grating needs at least one frame");
  if (!(wavelength >= 2.0)) throw InvalidArgument("wavelength below 2 pixels aliases");
  if (!(contrast >= 0.0)) throw InvalidArgument("contrast must be >= 0");

  FrameSequence seq;
  seq.spec.kind = StimulusKind::SineGrating1D;
  seq.spec.n = n;
  seq.spec.contrast = contrast;
  seq.spec.wavelength = wavelength;
  seq.spec.temporal_frequency = temporal_frequency;
  seq.spec.phase0 = phase0;
  seq.spec.boundary = Boundary::Periodic;
  seq.spec.motion.type = MotionType::Constant;
  seq.spec.motion.amplitude = temporal_frequency * wavelength;

  const double k = 2.0 * std::numbers::pi / wavelength;
  const double w = 2.0 * std::numbers::pi * temporal_frequency;
  seq.frames.resize(steps, n);
  for (int t = 0; t < steps; ++t)
    for (int i = 0; i < n; ++i) seq.frames(t, i) = contrast * std::sin(k * i - w * t + phase0);
  seq.ground_truth = RowMatrix::Constant(steps - 1, 1, temporal_frequency * wavelength);
  return seq;
}

Frame sample_patch(const RowMatrix& image, double cx, double cy, int side, double angle, double dx, double dy,
                   double aperture_sigma) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double half = 0.5 * (side - 1);
  Frame patch(side * side);
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      const double px = col - half - dx;
      const double py = r - half - dy;
      // R(-angle) applied to the offset from the patch centre.
      const double sx = c * px + s * py;
      const double sy = -s * px + c * py;
      patch[r * side + col] = sample_image(image, cx + sx, cy + sy, aperture_sigma);
    }
  }
  return patch;
}

RowMatrix rotate_image_bilinear(const RowMatrix& image, double angle) {
  const long rows = image.rows();
  const long cols = image.cols();
  const double hx = 0.5 * (cols - 1);
  const double hy = 0.5 * (rows - 1);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  auto at = [&](long r, long q) { return (r < 0 || q < 0 || r >= rows || q >= cols) ? 0.0 : image(r, q); };
  RowMatrix out(rows, cols);
  for (long r = 0; r < rows; ++r) {
    for (long q = 0; q < cols; ++q) {
      const double px = q - hx;
      const double py = r - hy;
      const double x = c * px + s * py + hx;
      const double y = -s * px + c * py + hy;
      const double fx = std::floor(x);
      const double fy = std::floor(y);
      const double ax = x - fx;
      const double ay = y - fy;
      const long x0 = static_cast<long>(fx);
      const long y0 = static_cast<long>(fy);
      out(r, q) = (1 - ax) * (1 - ay) * at(y0, x0) + ax * (1 - ay) * at(y0, x0 + 1) + (1 - ax) * ay * at(y0 + 1, x0) +
                  ax * ay * at(y0 + 1, x0 + 1);
    }
  }
  return out;
}

}  // namespace motionsm
