#pragma once

// Pipelines shared by the command-line tool, the Python module and the
// acceptance suite.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "motionsm/baselines.hpp"
#include "motionsm/config.hpp"
#include "motionsm/learner.hpp"
#include "motionsm/preprocess.hpp"
#include "motionsm/stimuli.hpp"

namespace motionsm {

struct TrainingData {
  std::vector<FrameSequence> episodes;
  WhiteningTransform whitener;
};

/// Episodes for one seed plus a ZCA transform fitted on the first
/// whitening.prefix_frames frames (identity when whitening is disabled).
TrainingData prepare_training_data(const ExperimentConfig& config, std::uint64_t seed);

/// Whitened features of every consecutive pair, one per row; at most
/// max_pairs rows when max_pairs > 0.
RowMatrix collect_features(const std::vector<FrameSequence>& episodes, const WhiteningTransform& whitener,
                           FeatureKind kind, long max_pairs = 0);

struct NamedOperator {
  std::string name;
  Matrix matrix;
};

/// Analytic generators the learned operators are scored against: the cartoon
/// matrix in 1D, the rotation generator for 2D rotation, and the four signed
/// cardinal translation generators for 2D translation.
std::vector<NamedOperator> analytic_targets(const StimulusSpec& spec);

/// Side length of the patch whose flattened size is `d`, or d itself in 1D.
int operator_side(const StimulusSpec& spec);

struct OperatorScore {
  int index = 0;
  std::string best_target;
  /// Cosine to the best-matching target: largest |cosine| for a single
  /// target, largest signed cosine within a family of signed generators.
  double target_cosine = 0.0;
  double antisymmetry = 0.0;
  /// 1D only (NaN otherwise).
  double toeplitz = 0.0;
};

std::vector<OperatorScore> score_operators(const RowMatrix& W, const StimulusSpec& spec);

/// Mutual cosine matrix of the rows of W.
Matrix mutual_cosines(const RowMatrix& W);

struct DirectionPreference {
  /// K x 2: time-averaged response to rightward (col 0) and leftward (col 1)
  /// drifting gratings.
  Matrix mean_response;
  /// Per channel: preferred / anti-preferred mean response (inf if the
  /// anti-preferred mean is zero).
  Vector ratio;
  /// +1 if the channel prefers rightward motion, -1 otherwise.
  Eigen::VectorXi preferred;
};

/// Responds a trained 1D learner to held-out drifting gratings through the
/// frozen whitener.
DirectionPreference grating_preference(const LearnerState& state, const WhiteningTransform& whitener,
                                       FeatureKind kind, const std::vector<double>& wavelengths,
                                       const std::vector<double>& speeds, int steps,
                                       const ResponseOptions& options = {});

struct RotateDemoResult {
  /// side x side images: the initial bar followed by one per iteration.
  std::vector<Matrix> frames;
  /// Pearson correlation of iteration k with the bar rotated by k * theta.
  std::vector<double> correlation;
  /// Scale that makes the operator's component along the analytic generator
  /// equal to the generator itself; fixes the learned operator's arbitrary
  /// units and sign.
  double calibration = 0.0;
};

/// side x side image of a bar along the main diagonal.
Matrix diagonal_bar(int side, double width);

/// Iterates x <- x + theta * s * A x from the diagonal bar, with
/// s = <G, G> / <A, G> for the rotation generator G.
RotateDemoResult rotate_demo(const Matrix& op, double theta, int steps, double bar_width);

struct EquivalenceSummary {
  double worst_relative = 0.0;
  double worst_absolute = 0.0;
  int cases = 0;
  nlohmann::json rows = nlohmann::json::array();
};

/// Random N(0, 1) streams checked for every (stream, tau, half width).
EquivalenceSummary run_equivalence(const EquivConfig& config, std::uint64_t seed);

/// Metrics across checkpoints: per-operator scores, mutual cosines, and
/// principal angles between every pair of checkpoints.
nlohmann::json compare_checkpoints(const std::vector<std::filesystem::path>& dirs, const StimulusSpec& spec,
                                   bool force, const std::filesystem::path& image_dir);

/// Tiles an operator for display: 1D operators as is; for 2D patches one
/// side x side tile per row (per output pixel), arranged on a side x side grid.
Matrix operator_image(const Matrix& op);

}  // namespace motionsm
