#pragma once

// Synthetic visual worlds and motion-transformed frame sequences with known
// ground-truth transformation magnitudes.

#include <cstdint>
#include <string>
#include <vector>

#include "motionsm/core.hpp"

namespace motionsm {

/// A 1D light-intensity profile sampled at integer positions.
struct World1D {
  Vector intensities;
  double correlation_length = 0.0;
  std::uint64_t seed = 0;

  int length() const { return static_cast<int>(intensities.size()); }
};

enum class StimulusKind { NoiseWorld1D, SineGrating1D, NoiseImage2D };
enum class Boundary { WindowOnLargerWorld, Periodic };
enum class Transform2D { Translation, Rotation };

enum class MotionType {
  Static,         // zero displacement every step
  Constant,       // +amplitude every step (x axis for 2D translation)
  UniformJitter,  // i.i.d. uniform in [-amplitude, amplitude]
  RandomSign,     // +-amplitude with a fair random sign
  Telegraph,      // |d| ~ U(0, amplitude], sign persists, flips with flip_probability
  Cardinal,       // 2D translation: random cardinal direction, |d| ~ U(0, amplitude]
  Explicit,       // values supplied by the caller
};

/// Declarative motion program. Realised into per-step displacements by
/// realize_program(); pixels/step for translations, radians/step for rotations.
/// Positive translations move the image content toward increasing pixel
/// (column, row) index; positive angles turn it counter-clockwise in (x, y).
struct MotionSpec {
  MotionType type = MotionType::Static;
  double amplitude = 0.0;
  double flip_probability = 0.01;
  /// Explicit programs: one row per step, one column per axis.
  RowMatrix values;
};

struct StimulusSpec {
  StimulusKind kind = StimulusKind::NoiseWorld1D;
  /// Window size in pixels (per axis for 2D patches).
  int n = 5;
  MotionSpec motion;
  double contrast = 1.0;
  Boundary boundary = Boundary::WindowOnLargerWorld;

  // Noise worlds.
  double correlation_length = 2.0;
  /// Gaussian photoreceptor aperture (std, pixels). 0 selects plain linear
  /// (1D) or bilinear (2D) interpolation of the world samples.
  double aperture_sigma = 0.0;
  /// 1D world length; 0 picks max(64 n, extent of the motion path).
  int world_length = 0;
  Transform2D transform = Transform2D::Translation;

  // Gratings.
  double wavelength = 8.0;
  double temporal_frequency = 0.0;
  double phase0 = 0.0;

  /// Number of axes in the realised motion program.
  int program_axes() const;
  /// Pixels per frame (n or n*n).
  int frame_size() const;
};

struct FrameSequence {
  StimulusSpec spec;
  /// T x frame_size, one frame per row.
  RowMatrix frames;
  /// (T-1) x program_axes: displacement (px/step) or angle (rad/step) applied
  /// between frame t and t+1; for gratings the drift velocity f * wavelength.
  RowMatrix ground_truth;

  int steps() const { return static_cast<int>(frames.rows()); }
  Frame frame(int t) const { return frames.row(t).transpose(); }
};

std::string to_string(StimulusKind kind);
std::string to_string(Boundary boundary);
std::string to_string(Transform2D transform);
std::string to_string(MotionType type);
StimulusKind stimulus_kind_from_string(const std::string& s);
Boundary boundary_from_string(const std::string& s);
Transform2D transform_from_string(const std::string& s);
MotionType motion_type_from_string(const std::string& s);

/// Zero-mean, unit-variance Gaussian process with autocovariance
/// exp(-|l| / correlation_length), realised by a stationary AR(1) recursion.
World1D generate_world_1d(int length, double correlation_length, std::uint64_t seed);

struct Sampler {
  double aperture_sigma = 0.0;
  Boundary boundary = Boundary::WindowOnLargerWorld;
};

/// Reads n samples at position, position + 1, ... Subpixel positions are
/// linearly interpolated; with a positive aperture the world is instead
/// convolved with a normalised Gaussian of that width.
Frame sample_window(const World1D& world, double position, int n, const Sampler& sampler = {});

/// Realises a motion program with `steps` rows and `axes` columns.
RowMatrix realize_program(const MotionSpec& motion, int steps, int axes, std::uint64_t seed);

/// frames[t + 1] is frames[t] transformed by program row t.
FrameSequence generate_sequence(const StimulusSpec& spec, int steps, std::uint64_t seed);

/// Independent sequences, each on its own freshly drawn world or seed image
/// (a "saccade" between episodes). Pairs never straddle two episodes.
std::vector<FrameSequence> generate_episodes(const StimulusSpec& spec, int episodes, int steps,
                                             std::uint64_t seed);

/// frames[t][i] = c sin(2 pi i / wavelength - 2 pi f t + phase0).
FrameSequence generate_grating(int n, double wavelength, double temporal_frequency,
                               double contrast, int steps, double phase0 = 0.0);

// 2D helpers. Images are row-major (row = y, column = x); patch pixels are
// flattened row-major as well.

/// Samples a side x side patch whose centre sits at (cx, cy) in image
/// coordinates. The patch content is the image rotated by `angle` (radians,
/// positive = counter-clockwise in (x, y)) and shifted by (dx, dy) about that
/// centre: value(p) = image(R(-angle) (p - c) + c - d).
Frame sample_patch(const RowMatrix& image, double cx, double cy, int side, double angle,
                   double dx, double dy, double aperture_sigma);

/// Bilinear rotation of a small image about its centre, zero outside.
RowMatrix rotate_image_bilinear(const RowMatrix& image, double angle);

}  // namespace motionsm
