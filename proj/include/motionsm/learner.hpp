#pragma once

// Online similarity matching (SM) and nonnegative similarity matching (NSM)
// on outer-product features: a Hebbian feedforward tensor W, anti-Hebbian
// lateral weights M and per-channel cumulative activity that sets the
// learning rate.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "motionsm/core.hpp"
#include "motionsm/features.hpp"
#include "motionsm/preprocess.hpp"
#include "motionsm/stimuli.hpp"

namespace motionsm {

enum class LearnerMode { SM, NSM };

std::string to_string(LearnerMode mode);
LearnerMode learner_mode_from_string(const std::string& s);

struct LearnerState {
  LearnerMode mode = LearnerMode::SM;
  /// Pixels per frame; features have n * n entries.
  int n = 0;
  /// K x n^2. Row a is vec(A^a).
  RowMatrix W;
  /// K x K lateral weights, diagonal held at zero.
  Matrix M;
  /// Cumulative squared activity per channel; its inverse is the step size.
  Vector cumulative;
  long step = 0;
  std::uint64_t seed = 0;

  int channels() const { return static_cast<int>(W.rows()); }
};

/// W ~ N(0, (1/n)^2) i.i.d., M = 0, cumulative activity = initial_cumulative.
LearnerState init(int K, int n, std::uint64_t seed, LearnerMode mode, double initial_cumulative = 1.0);

enum class ResponseSolver {
  /// SM: exact K x K solve. NSM: cyclic coordinate fixed-point iteration.
  Direct,
  /// Euler-integrated neural dynamics dTheta = eta (W chi - M Theta - Theta),
  /// rectified for NSM. Slower; kept for fidelity runs.
  Dynamics,
};

struct ResponseOptions {
  ResponseSolver solver = ResponseSolver::Direct;
  double tolerance = 1e-10;
  int max_sweeps = 500;
  double dynamics_step = 0.2;
  int dynamics_max_iterations = 200000;
};

struct Response {
  Vector theta;
  bool converged = true;
  int iterations = 0;
};

/// W chi computed from the flattened feature.
Vector feedforward(const LearnerState& state, const FeatureVector& chi);

/// W chi computed per output channel from the frame pair without forming
/// chi: each channel sums, over pixels i, the left factor at i times the
/// i-th row of A^a applied to the right factor.
Vector feedforward_rank1(const LearnerState& state, FeatureKind kind, const Frame& x, const Frame& x_next);

/// Solves the fixed point Theta = drive - M Theta (rectified for NSM).
/// Throws NumericalFailure if (I + M) is singular in SM mode; an NSM
/// iteration that hits the sweep cap returns the last iterate with
/// converged = false.
Response respond_to_drive(const LearnerState& state, const Vector& drive, const ResponseOptions& options = {});
Response respond(const LearnerState& state, const FeatureVector& chi, const ResponseOptions& options = {});

/// One step of the recursive updates, in order: cumulative activity, then W
/// and off-diagonal M, both divided by the updated cumulative activity.
void update(LearnerState& state, const FeatureVector& chi, const Vector& theta);

/// Row a of W reshaped to n x n.
Matrix operator_matrix(const LearnerState& state, int a);

struct TrainOptions {
  FeatureKind feature = FeatureKind::Standard;
  LearnerMode mode = LearnerMode::SM;
  int K = 1;
  std::uint64_t seed = 0;
  double initial_cumulative = 1.0;
  ResponseOptions response;
  /// Snapshot W every this many steps (0 disables) and at the listed steps.
  long snapshot_interval = 0;
  std::vector<long> snapshot_steps;
  /// SM objective on a fixed probe batch of the first probe_size pairs,
  /// evaluated every objective_interval steps (0 disables).
  int probe_size = 200;
  long objective_interval = 0;
  bool record_theta = true;
  /// Cosine above which two NSM channels count as collapsed.
  double collapse_cosine = 0.99;
};

struct WeightSnapshot {
  long step = 0;
  RowMatrix W;
};

struct ObjectiveSample {
  long step = 0;
  double value = 0.0;
};

struct TrainTrace {
  /// One row per processed pair.
  RowMatrix theta;
  std::vector<ObjectiveSample> objective;
  std::vector<WeightSnapshot> snapshots;
  std::vector<std::string> warnings;
  long nonconverged = 0;
};

struct TrainResult {
  LearnerState state;
  TrainTrace trace;
};

/// Streams every consecutive pair of every episode through whitening,
/// feature construction, response and update.
TrainResult train(std::span<const FrameSequence> episodes, const WhiteningTransform& whitener,
                  const TrainOptions& options);
TrainResult train(const FrameSequence& stream, const WhiteningTransform& whitener, const TrainOptions& options);

/// Probe-batch SM objective (1/P^2) ||X^T X - Theta^T Theta||_F^2.
double sm_objective(const LearnerState& state, const RowMatrix& probe_features, const ResponseOptions& options = {});

/// Pairs of channels whose filters have cosine above `threshold`.
std::vector<std::pair<int, int>> collapsed_channels(const LearnerState& state, double threshold);

}  // namespace motionsm
