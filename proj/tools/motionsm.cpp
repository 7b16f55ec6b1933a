// motionsm: command-line harness for stimulus generation, learner training,
// oracle baselines, detector sweeps, the HRD equivalence check, the rotation
// demo and checkpoint reports.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "motionsm/baselines.hpp"
#include "motionsm/config.hpp"
#include "motionsm/detector.hpp"
#include "motionsm/experiment.hpp"
#include "motionsm/io.hpp"
#include "motionsm/metrics.hpp"

namespace fs = std::filesystem;
using namespace motionsm;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kOutputRootVar = "MOTIONSM_OUTPUT_ROOT";

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  int jobs = 0;
};

struct Run {
  ExperimentConfig config;
  std::string hash;
  fs::path dir;
};

fs::path output_root() {
  const char* root = std::getenv(kOutputRootVar);
  return root && *root ? fs::path(root) : fs::current_path();
}

Run resolve(const Common& common, const std::string& command) {
  json doc = to_json(ExperimentConfig{});
  if (!common.config_path.empty()) {
    std::ifstream in(common.config_path);
    if (!in) throw InvalidArgument("cannot open config '" + common.config_path + "'");
    json given;
    try {
      in >> given;
    } catch (const json::exception& e) {
      throw InvalidArgument("config '" + common.config_path + "' is not valid JSON: " + e.what());
    }
    config_from_json(given);  // rejects unknown keys before merging
    doc.merge_patch(given);
  }
  doc = apply_overrides(doc, common.overrides);
  Run run;
  run.config = config_from_json(doc);
  run.hash = config_hash(run.config);
  const fs::path base = common.out.empty() ? output_root() / run.config.output_dir : fs::path(common.out);
  run.dir = base / (run.config.name + "-" + run.hash) / command;
  fs::create_directories(run.dir);
  json resolved = to_json(run.config);
  resolved["config_hash"] = run.hash;
  write_json(run.dir / "config.json", resolved);
  return run;
}

json tag(const Run& run, std::uint64_t seed) { return {{"config_hash", run.hash}, {"seed", seed}}; }

fs::path seed_dir(const Run& run, std::uint64_t seed) { return run.dir / ("seed-" + std::to_string(seed)); }

// Runs one worker per seed, at most `jobs` at a time; results come back in
// seed order so aggregate files do not depend on scheduling.
std::vector<json> for_each_seed(const Run& run, int jobs, const std::function<json(std::uint64_t)>& work) {
  std::vector<std::uint64_t> seeds = run.config.seeds;
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<json> results(seeds.size());
  for (std::size_t start = 0; start < seeds.size(); start += jobs) {
    std::vector<std::future<json>> batch;
    const std::size_t stop = std::min(seeds.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < stop; ++i) batch.push_back(std::async(std::launch::async, work, seeds[i]));
    for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
  }
  return results;
}

json scores_json(const RowMatrix& W, const StimulusSpec& spec) {
  json ops = json::array();
  for (const auto& s : score_operators(W, spec)) {
    json o = {{"index", s.index},
              {"best_target", s.best_target},
              {"target_cosine", s.target_cosine},
              {"antisymmetry_ratio", s.antisymmetry}};
    o["toeplitz_shift_score"] = std::isnan(s.toeplitz) ? json(nullptr) : json(s.toeplitz);
    ops.push_back(o);
  }
  return ops;
}

json mutual_json(const RowMatrix& W) {
  const Matrix mc = mutual_cosines(W);
  json out = json::array();
  for (Eigen::Index a = 0; a < mc.rows(); ++a)
    for (Eigen::Index b = a + 1; b < mc.cols(); ++b) out.push_back({{"a", a}, {"b", b}, {"cosine", mc(a, b)}});
  return out;
}

double finite_or_max(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::max(); }

// gen ------------------------------------------------------------------------

int cmd_gen(const Common& common, bool csv) {
  const Run run = resolve(common, "gen");
  auto results = for_each_seed(run, common.jobs, [&](std::uint64_t seed) {
    const auto episodes =
        generate_episodes(run.config.stimulus, run.config.data.episodes, run.config.data.steps, derive_seed(seed, 1));
    const fs::path dir = seed_dir(run, seed);
    fs::create_directories(dir);
    write_sequences(dir / "sequences.bin", episodes, tag(run, seed));
    if (csv) {
      for (std::size_t e = 0; e < episodes.size(); ++e)
        export_sequence_csv(dir / ("episode-" + std::to_string(e) + ".csv"), episodes[e]);
    }
    return json{{"seed", seed}, {"path", (dir / "sequences.bin").string()}, {"episodes", episodes.size()}};
  });
  write_json(run.dir / "summary.json", {{"config_hash", run.hash}, {"runs", results}});
  std::cout << run.dir.string() << "\n";
  return 0;
}

// train ----------------------------------------------------------------------

json train_one(const Run& run, std::uint64_t seed) {
  const ExperimentConfig& c = run.config;
  const TrainingData data = prepare_training_data(c, seed);
  const TrainResult result = train(data.episodes, data.whitener, c.train_options(seed));
  const fs::path dir = seed_dir(run, seed);
  json extra = tag(run, seed);
  extra["source"] = "learner";
  extra["feature"] = to_string(c.learner.feature);
  extra["stimulus"] = to_json(c.stimulus);
  save_checkpoint(dir / "checkpoint", result.state, extra);
  save_whitening(dir / "whitening.csv", data.whitener, tag(run, seed));
  if (result.trace.theta.size() > 0) write_trace_csv(dir / "trace.csv", result.trace.theta);
  for (const auto& snap : result.trace.snapshots) {
    LearnerState s = result.state;
    s.W = snap.W;
    s.step = snap.step;
    save_checkpoint(dir / ("snapshot-" + std::to_string(snap.step)), s, extra);
  }

  json metrics = tag(run, seed);
  metrics["steps"] = result.state.step;
  metrics["operators"] = scores_json(result.state.W, c.stimulus);
  metrics["mutual_cosines"] = mutual_json(result.state.W);
  json objective = json::array();
  for (const auto& o : result.trace.objective) objective.push_back({{"step", o.step}, {"value", o.value}});
  metrics["objective"] = objective;
  metrics["nonconverged_responses"] = result.trace.nonconverged;
  metrics["warnings"] = result.trace.warnings;
  if (c.stimulus.kind == StimulusKind::NoiseWorld1D) {
    const DirectionPreference p = grating_preference(result.state, data.whitener, c.learner.feature, {8.0, 12.0, 16.0},
                                                     {0.1, 0.2}, 400, c.train_options(seed).response);
    json pref = json::array();
    for (int a = 0; a < result.state.channels(); ++a) {
      pref.push_back({{"channel", a},
                      {"rightward_mean", p.mean_response(a, 0)},
                      {"leftward_mean", p.mean_response(a, 1)},
                      {"preferred", p.preferred[a] > 0 ? "right" : "left"},
                      {"ratio", finite_or_max(p.ratio[a])}});
    }
    metrics["grating_preference"] = pref;
  }
  if (!result.trace.snapshots.empty()) {
    // Principal angle of every snapshot to the final subspace.
    json drift = json::array();
    for (const auto& snap : result.trace.snapshots) {
      const Vector pa = principal_angles(snap.W, result.state.W);
      drift.push_back({{"step", snap.step}, {"largest_deg", pa.maxCoeff() * 180.0 / std::numbers::pi}});
    }
    metrics["snapshot_angles_to_final"] = drift;
  }
  write_json(dir / "metrics.json", metrics);
  for (const auto& w : result.trace.warnings) std::cerr << "seed " << seed << ": warning: " << w << "\n";
  return metrics;
}

int cmd_train(const Common& common) {
  const Run run = resolve(common, "train");
  auto results = for_each_seed(run, common.jobs, [&](std::uint64_t seed) { return train_one(run, seed); });
  write_json(run.dir / "summary.json", {{"config_hash", run.hash}, {"runs", results}});
  std::cout << run.dir.string() << "\n";
  return 0;
}

// baseline -------------------------------------------------------------------

json baseline_one(const Run& run, std::uint64_t seed) {
  const ExperimentConfig& c = run.config;
  const TrainingData data = prepare_training_data(c, seed);
  const RowMatrix X = collect_features(data.episodes, data.whitener, c.learner.feature, c.baseline.max_pairs);
  const fs::path dir = seed_dir(run, seed);
  json extra = tag(run, seed);
  extra["feature"] = to_string(c.learner.feature);
  extra["stimulus"] = to_json(c.stimulus);
  extra["pairs"] = X.rows();

  const PcaResult pca = pca_features(X, c.baseline.K);
  LearnerState ps;
  ps.mode = LearnerMode::SM;
  ps.n = c.stimulus.frame_size();
  ps.seed = seed;
  ps.W = pca.components;
  ps.M = Matrix::Zero(c.baseline.K, c.baseline.K);
  ps.cumulative = Vector::Ones(c.baseline.K);
  ps.step = X.rows();
  extra["source"] = "pca";
  save_checkpoint(dir / "pca", ps, extra);

  const KmeansResult km = kmeans_features(X, c.baseline.K, derive_seed(seed, 2), c.baseline.kmeans_max_iter);
  LearnerState ks = ps;
  ks.mode = LearnerMode::NSM;
  ks.W = km.centroids;
  extra["source"] = "kmeans";
  save_checkpoint(dir / "kmeans", ks, extra);

  json metrics = tag(run, seed);
  metrics["pairs"] = X.rows();
  metrics["pca"] = {{"eigenvalues", std::vector<double>(pca.eigenvalues.data(),
                                                        pca.eigenvalues.data() + pca.eigenvalues.size())},
                    {"rank", pca.rank},
                    {"objective", pca_objective(X, pca.components)},
                    {"operators", scores_json(pca.components, c.stimulus)},
                    {"warnings", pca.warnings}};
  metrics["kmeans"] = {{"inertia", km.inertia},
                       {"inertia_history", km.inertia_history},
                       {"iterations", km.iterations},
                       {"converged", km.converged},
                       {"operators", scores_json(km.centroids, c.stimulus)},
                       {"mutual_cosines", mutual_json(km.centroids)},
                       {"warnings", km.warnings}};
  write_json(dir / "metrics.json", metrics);
  return metrics;
}

int cmd_baseline(const Common& common) {
  const Run run = resolve(common, "baseline");
  auto results = for_each_seed(run, common.jobs, [&](std::uint64_t seed) { return baseline_one(run, seed); });
  write_json(run.dir / "summary.json", {{"config_hash", run.hash}, {"runs", results}});
  std::cout << run.dir.string() << "\n";
  return 0;
}

// detect ---------------------------------------------------------------------

int cmd_detect(const Common& common) {
  const Run run = resolve(common, "detect");
  const DetectorConfig& d = run.config.detector;
  const TuningCurve curve = tuning_sweep(d.kind, d.grating, d.sweep.axis, d.sweep.values, d.keep_series);

  std::ofstream csv(run.dir / "sweep.csv");
  if (!csv) throw IoError("cannot write sweep.csv");
  csv.precision(17);
  csv << "value,contrast,wavelength,temporal_frequency,velocity,mean,oscillation_frequency,oscillation_amplitude";
  const Eigen::Index series_len = d.keep_series && !curve.points.empty() ? curve.points.front().series.size() : 0;
  for (Eigen::Index t = 0; t < series_len; ++t) csv << ",y" << t;
  csv << "\n";
  json points = json::array();
  for (const auto& p : curve.points) {
    csv << p.value << ',' << p.contrast << ',' << p.wavelength << ',' << p.temporal_frequency << ',' << p.velocity
        << ',' << p.mean << ',' << p.oscillation.frequency << ',' << p.oscillation.amplitude;
    for (Eigen::Index t = 0; t < series_len; ++t) csv << ',' << p.series[t];
    csv << "\n";
    points.push_back({{"value", p.value},
                      {"mean", p.mean},
                      {"temporal_frequency", p.temporal_frequency},
                      {"velocity", p.velocity},
                      {"oscillation_frequency", p.oscillation.frequency},
                      {"dft_resolution", p.oscillation.resolution}});
  }

  json summary = {{"config_hash", run.hash},
                  {"detector", to_string(d.kind)},
                  {"axis", to_string(d.sweep.axis)},
                  {"points", points}};
  if (!curve.points.empty()) {
    // The detector output is negative for rightward drift; extremes are
    // taken on magnitude.
    const auto peak = std::max_element(curve.points.begin(), curve.points.end(),
                                       [](const SweepPoint& a, const SweepPoint& b) {
                                         return std::abs(a.mean) < std::abs(b.mean);
                                       });
    summary["peak"] = {{"value", peak->value},
                       {"temporal_frequency", peak->temporal_frequency},
                       {"velocity", peak->velocity},
                       {"mean", peak->mean}};
  }
  if (d.sweep.axis == SweepAxis::Contrast) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& p : curve.points) {
      if (p.value <= 0.0 || p.mean == 0.0) continue;
      const double lx = std::log(p.value);
      const double ly = std::log(std::abs(p.mean));
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++m;
    }
    if (m >= 2) summary["loglog_slope"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  write_json(run.dir / "sweep.json", summary);
  std::cout << run.dir.string() << "\n";
  return 0;
}

// equiv ----------------------------------------------------------------------

int cmd_equiv(const Common& common) {
  const Run run = resolve(common, "equiv");
  const std::uint64_t seed = run.config.seeds.front();
  const EquivalenceSummary s = run_equivalence(run.config.equiv, seed);
  std::ofstream csv(run.dir / "residuals.csv");
  if (!csv) throw IoError("cannot write residuals.csv");
  csv.precision(17);
  csv << "stream,half_width,tau,max_residual,scale,max_relative\n";
  for (const auto& r : s.rows) {
    csv << r["stream"].get<int>() << ',' << r["half_width"].get<int>() << ',' << r["tau"].get<int>() << ','
        << r["max_residual"].get<double>() << ',' << r["scale"].get<double>() << ','
        << r["max_relative"].get<double>() << "\n";
  }
  write_json(run.dir / "equiv.json", {{"config_hash", run.hash},
                                      {"seed", seed},
                                      {"cases", s.cases},
                                      {"periodic", run.config.equiv.periodic},
                                      {"worst_relative", s.worst_relative},
                                      {"worst_absolute", s.worst_absolute}});
  std::cout << run.dir.string() << "\n";
  std::printf("worst relative residual %.3e over %d cases\n", s.worst_relative, s.cases);
  return 0;
}

// rotate-demo ----------------------------------------------------------------

int cmd_rotate_demo(const Common& common, const std::string& checkpoint, bool analytic) {
  const Run run = resolve(common, "rotate-demo");
  const RotateDemoConfig& rd = run.config.rotate_demo;
  const fs::path dir = run.dir / (analytic ? "analytic" : fs::path(checkpoint).parent_path().filename().string());
  fs::create_directories(dir);
  std::vector<NamedOperator> ops;
  json source = {{"analytic", analytic}};
  if (analytic) {
    ops.push_back({"rotation", rotation_generator(run.config.stimulus.n)});
  } else {
    if (checkpoint.empty()) throw InvalidArgument("rotate-demo needs --checkpoint or --analytic");
    const Checkpoint ck = load_checkpoint(checkpoint);
    source["checkpoint"] = checkpoint;
    source["checkpoint_config_hash"] = ck.manifest.value("config_hash", std::string());
    for (int a = 0; a < ck.state.channels(); ++a) {
      const Matrix op = operator_matrix(ck.state, a);
      if (op.rows() != op.cols()) throw InvalidArgument("operator is not square");
      const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(op.rows()))));
      if (side * side != op.rows()) throw InvalidArgument("checkpoint does not hold 2D patch operators");
      ops.push_back({"op" + std::to_string(a), op});
    }
  }
  json out = {{"config_hash", run.hash},
              {"theta", rd.theta},
              {"steps", rd.steps},
              {"bar_width", rd.bar_width},
              {"source", source}};
  json demos = json::array();
  for (const auto& op : ops) {
    const RotateDemoResult r = rotate_demo(op.matrix, rd.theta, rd.steps, rd.bar_width);
    json frames = json::array();
    for (std::size_t k = 0; k < r.frames.size(); ++k) {
      const std::string name = op.name + "_step" + std::to_string(k) + ".pgm";
      const PgmAffine affine = write_pgm(dir / name, r.frames[k]);
      frames.push_back({{"step", k}, {"image", name}, {"affine", to_json(affine)}});
    }
    demos.push_back(
        {{"operator", op.name}, {"calibration", r.calibration}, {"correlation", r.correlation}, {"frames", frames}});
    std::printf("%s:", op.name.c_str());
    for (double v : r.correlation) std::printf(" %.4f", v);
    std::printf("\n");
  }
  out["demos"] = demos;
  write_json(dir / "demo.json", out);
  std::cout << dir.string() << "\n";
  return 0;
}

// report ---------------------------------------------------------------------

int cmd_report(const Common& common, const std::vector<std::string>& checkpoints, bool force) {
  std::string joined;
  for (const auto& c : checkpoints) joined += fs::absolute(c).lexically_normal().string() + "\n";
  const Run run = resolve(common, "report/" + hex64(fnv1a64(joined.data(), joined.size())));
  std::vector<fs::path> dirs(checkpoints.begin(), checkpoints.end());
  StimulusSpec spec = run.config.stimulus;
  if (common.config_path.empty() && common.overrides.empty() && !dirs.empty()) {
    const json manifest = read_json(dirs.front() / "manifest.json");
    if (manifest.contains("stimulus")) spec = stimulus_from_json(manifest.at("stimulus"));
  }
  json report = compare_checkpoints(dirs, spec, force, run.dir);
  report["config_hash"] = run.hash;
  report["forced"] = force;
  write_json(run.dir / "report.json", report);

  std::ofstream csv(run.dir / "report.csv");
  if (!csv) throw IoError("cannot write report.csv");
  csv.precision(17);
  csv << "checkpoint,config_hash,seed,source,operator,best_target,target_cosine,antisymmetry_ratio,"
         "toeplitz_shift_score\n";
  for (std::size_t i = 0; i < report["checkpoints"].size(); ++i) {
    const json& c = report["checkpoints"][i];
    for (const json& o : c["operators"]) {
      csv << i << ',' << c["config_hash"].get<std::string>() << ',' << c["seed"].get<std::uint64_t>() << ','
          << c["source"].get<std::string>() << ',' << o["index"].get<int>() << ','
          << o["best_target"].get<std::string>() << ',' << o["target_cosine"].get<double>() << ','
          << o["antisymmetry_ratio"].get<double>() << ',';
      if (!o["toeplitz_shift_score"].is_null()) csv << o["toeplitz_shift_score"].get<double>();
      csv << "\n";
    }
  }
  std::cout << run.dir.string() << "\n";
  return 0;
}

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("-c,--config", common.config_path, "JSON config file");
  sub->add_option("--set", common.overrides, "Override a config key, e.g. --set learner.K=2")->take_all();
  sub->add_option("-o,--out", common.out,
                  std::string("Output base directory (default: $") + kOutputRootVar + "/<output.dir>)");
  sub->add_option("-j,--jobs", common.jobs, "Concurrent per-seed workers (default: hardware threads)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-detection similarity-matching experiments"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen", "Generate stimulus sequences");
  add_common(gen, common);
  bool csv = false;
  gen->add_flag("--csv", csv, "Also export every episode as CSV");

  auto* train_cmd = app.add_subcommand("train", "Train SM/NSM learners and write checkpoints");
  add_common(train_cmd, common);

  auto* baseline = app.add_subcommand("baseline", "Fit the PCA and K-means oracles");
  add_common(baseline, common);

  auto* detect = app.add_subcommand("detect", "Sweep a fixed detector over drifting gratings");
  add_common(detect, common);

  auto* equiv = app.add_subcommand("equiv", "Check the summed cartoon / HR identity on random streams");
  add_common(equiv, common);

  auto* rotate = app.add_subcommand("rotate-demo", "Apply a learned rotation operator to a diagonal bar");
  add_common(rotate, common);
  std::string checkpoint;
  bool analytic = false;
  rotate->add_option("--checkpoint", checkpoint, "Checkpoint directory");
  rotate->add_flag("--analytic", analytic, "Use the analytic rotation generator instead of a checkpoint");

  auto* report = app.add_subcommand("report", "Score checkpoints and write filter images");
  add_common(report, common);
  std::vector<std::string> checkpoints;
  bool force = false;
  report->add_option("checkpoints", checkpoints, "Checkpoint directories")->required();
  report->add_flag("--force", force, "Compare checkpoints from different configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*gen) return cmd_gen(common, csv);
    if (*train_cmd) return cmd_train(common);
    if (*baseline) return cmd_baseline(common);
    if (*detect) return cmd_detect(common);
    if (*equiv) return cmd_equiv(common);
    if (*rotate) return cmd_rotate_demo(common, checkpoint, analytic);
    if (*report) return cmd_report(common, checkpoints, force);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const OutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
