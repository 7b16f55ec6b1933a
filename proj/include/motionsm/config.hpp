#pragma once

// Experiment configuration: one JSON document, dot-path overrides and a
// content hash that tags every emitted artifact.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "motionsm/detector.hpp"
#include "motionsm/features.hpp"
#include "motionsm/learner.hpp"
#include "motionsm/stimuli.hpp"

namespace motionsm {

using json = nlohmann::json;

struct DataConfig {
  /// Independent episodes, each on a fresh world or seed image.
  int episodes = 1;
  /// Frames per episode.
  int steps = 200001;
};

struct WhiteningConfig {
  bool enabled = true;
  double epsilon = 1e-5;
  bool relative = true;
  /// Frames (from the start of the stream) used to fit the transform.
  int prefix_frames = 50000;
};

struct LearnerConfig {
  LearnerMode mode = LearnerMode::SM;
  int K = 2;
  FeatureKind feature = FeatureKind::Standard;
  double initial_cumulative = 1.0;
  ResponseSolver solver = ResponseSolver::Direct;
  double tolerance = 1e-10;
  int max_sweeps = 500;
  double dynamics_step = 0.2;
  long checkpoint_interval = 0;
  std::vector<long> snapshot_steps;
  int probe_size = 200;
  long objective_interval = 10000;
  double collapse_cosine = 0.99;
};

struct BaselineConfig {
  int K = 2;
  int kmeans_max_iter = 100;
  /// Cap on the feature population (0 = every pair).
  long max_pairs = 0;
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::Contrast;
  std::vector<double> values = {0.25, 0.5, 1.0, 2.0, 4.0};
};

struct DetectorConfig {
  DetectorKind kind = DetectorKind::Cartoon;
  double lambda = 1.0;
  GratingParams grating;
  SweepConfig sweep;
  bool keep_series = false;
};

struct EquivConfig {
  int streams = 100;
  std::vector<int> taus = {1, 2, 4};
  /// Summation over i = -h .. h for every h listed.
  std::vector<int> half_widths = {5, 21};
  int steps = 32;
  bool periodic = false;
};

struct RotateDemoConfig {
  int steps = 3;
  double theta = 0.1;
  double bar_width = 0.75;
};

struct ExperimentConfig {
  std::string name = "default";
  StimulusSpec stimulus;
  DataConfig data;
  std::vector<std::uint64_t> seeds = {1};
  WhiteningConfig whitening;
  LearnerConfig learner;
  BaselineConfig baseline;
  DetectorConfig detector;
  EquivConfig equiv;
  RotateDemoConfig rotate_demo;
  std::map<std::string, double> thresholds;
  /// Relative to the output root; excluded from the hash.
  std::string output_dir = "runs";

  TrainOptions train_options(std::uint64_t seed) const;
};

json to_json(const StimulusSpec& spec);
StimulusSpec stimulus_from_json(const json& j);

json to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys and ill-typed values throw
/// InvalidArgument.
ExperimentConfig config_from_json(const json& j);

ExperimentConfig load_config(const std::string& path);
/// Applies "a.b.c=value" overrides. The value is parsed as JSON when
/// possible and taken as a string otherwise.
json apply_overrides(json document, const std::vector<std::string>& assignments);

/// FNV-1a of the canonical serialization, output location excluded.
std::string config_hash(const ExperimentConfig& config);

/// Threshold lookup with a default.
double threshold(const ExperimentConfig& config, const std::string& key, double fallback);

}  // namespace motionsm
