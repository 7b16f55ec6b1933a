#include "motionsm/config.hpp"

#include <fstream>
#include <sstream>

namespace motionsm {

namespace {

json program_to_json(const MotionSpec& m) {
  json j = {{"type", to_string(m.type)}, {"amplitude", m.amplitude}, {"flip_probability", m.flip_probability}};
  if (m.values.size() > 0) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) row.push_back(m.values(r, c));
      rows.push_back(row);
    }
    j["values"] = rows;
  } else {
    j["values"] = json::array();
  }
  return j;
}

MotionSpec program_from_json(const json& j) {
  MotionSpec m;
  if (j.contains("type")) m.type = motion_type_from_string(j.at("type").get<std::string>());
  if (j.contains("amplitude")) m.amplitude = j.at("amplitude").get<double>();
  if (j.contains("flip_probability")) m.flip_probability = j.at("flip_probability").get<double>();
  if (j.contains("values") && !j.at("values").empty()) {
    const json& rows = j.at("values");
    const std::size_t cols = rows.at(0).is_array() ? rows.at(0).size() : 1;
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].is_array()) {
        if (rows[r].size() != cols) throw InvalidArgument("ragged explicit motion program");
        for (std::size_t c = 0; c < cols; ++c) m.values(r, c) = rows[r][c].get<double>();
      } else {
        m.values(r, 0) = rows[r].get<double>();
      }
    }
  }
  return m;
}

json grating_to_json(const GratingParams& g) {
  return {{"n", g.n},         {"wavelength", g.wavelength}, {"temporal_frequency", g.temporal_frequency},
          {"contrast", g.contrast}, {"steps", g.steps},     {"phase0", g.phase0},
          {"tau", g.tau}};
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Every key of `given` must exist in `reference`, recursively; free-form
// maps are listed in `open`.
void check_keys(const json& given, const json& reference, const std::string& path) {
  if (!given.is_object()) return;
  if (!reference.is_object()) throw InvalidArgument("config key '" + path + "' is not an object");
  for (const auto& [key, value] : given.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw InvalidArgument("unknown config key '" + here + "'");
    if (here == "thresholds" || here == "stimulus.motion.values") continue;
    if (value.is_object()) check_keys(value, reference.at(key), here);
  }
}

}  // namespace

TrainOptions ExperimentConfig::train_options(std::uint64_t seed) const {
  TrainOptions o;
  o.feature = learner.feature;
  o.mode = learner.mode;
  o.K = learner.K;
  o.seed = seed;
  o.initial_cumulative = learner.initial_cumulative;
  o.response.solver = learner.solver;
  o.response.tolerance = learner.tolerance;
  o.response.max_sweeps = learner.max_sweeps;
  o.response.dynamics_step = learner.dynamics_step;
  o.snapshot_interval = learner.checkpoint_interval;
  o.snapshot_steps = learner.snapshot_steps;
  o.probe_size = learner.probe_size;
  o.objective_interval = learner.objective_interval;
  o.collapse_cosine = learner.collapse_cosine;
  return o;
}

json to_json(const StimulusSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"n", s.n},
          {"motion", program_to_json(s.motion)},
          {"contrast", s.contrast},
          {"boundary", to_string(s.boundary)},
          {"correlation_length", s.correlation_length},
          {"aperture_sigma", s.aperture_sigma},
          {"world_length", s.world_length},
          {"transform", to_string(s.transform)},
          {"wavelength", s.wavelength},
          {"temporal_frequency", s.temporal_frequency},
          {"phase0", s.phase0}};
}

StimulusSpec stimulus_from_json(const json& j) {
  StimulusSpec s;
  if (j.contains("kind")) s.kind = stimulus_kind_from_string(j.at("kind").get<std::string>());
  read(j, "n", s.n);
  if (j.contains("motion")) s.motion = program_from_json(j.at("motion"));
  read(j, "contrast", s.contrast);
  if (j.contains("boundary")) s.boundary = boundary_from_string(j.at("boundary").get<std::string>());
  read(j, "correlation_length", s.correlation_length);
  read(j, "aperture_sigma", s.aperture_sigma);
  read(j, "world_length", s.world_length);
  if (j.contains("transform")) s.transform = transform_from_string(j.at("transform").get<std::string>());
  read(j, "wavelength", s.wavelength);
  read(j, "temporal_frequency", s.temporal_frequency);
  read(j, "phase0", s.phase0);
  return s;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["stimulus"] = to_json(c.stimulus);
  j["data"] = {{"episodes", c.data.episodes}, {"steps", c.data.steps}};
  j["seeds"] = c.seeds;
  j["whitening"] = {{"enabled", c.whitening.enabled},
                    {"epsilon", c.whitening.epsilon},
                    {"relative", c.whitening.relative},
                    {"prefix_frames", c.whitening.prefix_frames}};
  const LearnerConfig& l = c.learner;
  j["learner"] = {{"mode", to_string(l.mode)},
                  {"K", l.K},
                  {"feature", to_string(l.feature)},
                  {"initial_cumulative", l.initial_cumulative},
                  {"solver", l.solver == ResponseSolver::Dynamics ? "dynamics" : "direct"},
                  {"tolerance", l.tolerance},
                  {"max_sweeps", l.max_sweeps},
                  {"dynamics_step", l.dynamics_step},
                  {"checkpoint_interval", l.checkpoint_interval},
                  {"snapshot_steps", l.snapshot_steps},
                  {"probe_size", l.probe_size},
                  {"objective_interval", l.objective_interval},
                  {"collapse_cosine", l.collapse_cosine}};
  j["baseline"] = {{"K", c.baseline.K}, {"kmeans_max_iter", c.baseline.kmeans_max_iter},
                   {"max_pairs", c.baseline.max_pairs}};
  j["detector"] = {{"kind", to_string(c.detector.kind)},
                   {"lambda", c.detector.lambda},
                   {"grating", grating_to_json(c.detector.grating)},
                   {"sweep", {{"axis", to_string(c.detector.sweep.axis)}, {"values", c.detector.sweep.values}}},
                   {"keep_series", c.detector.keep_series}};
  j["equiv"] = {{"streams", c.equiv.streams},
                {"taus", c.equiv.taus},
                {"half_widths", c.equiv.half_widths},
                {"steps", c.equiv.steps},
                {"periodic", c.equiv.periodic}};
  j["rotate_demo"] = {{"steps", c.rotate_demo.steps},
                      {"theta", c.rotate_demo.theta},
                      {"bar_width", c.rotate_demo.bar_width}};
  j["thresholds"] = c.thresholds;
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  ExperimentConfig c;
  check_keys(j, to_json(c), "");
  try {
    read(j, "name", c.name);
    if (j.contains("stimulus")) c.stimulus = stimulus_from_json(j.at("stimulus"));
    if (j.contains("data")) {
      read(j["data"], "episodes", c.data.episodes);
      read(j["data"], "steps", c.data.steps);
    }
    read(j, "seeds", c.seeds);
    if (j.contains("whitening")) {
      const json& w = j.at("whitening");
      read(w, "enabled", c.whitening.enabled);
      read(w, "epsilon", c.whitening.epsilon);
      read(w, "relative", c.whitening.relative);
      read(w, "prefix_frames", c.whitening.prefix_frames);
    }
    if (j.contains("learner")) {
      const json& l = j.at("learner");
      LearnerConfig& o = c.learner;
      if (l.contains("mode")) o.mode = learner_mode_from_string(l.at("mode").get<std::string>());
      read(l, "K", o.K);
      if (l.contains("feature")) o.feature = feature_kind_from_string(l.at("feature").get<std::string>());
      read(l, "initial_cumulative", o.initial_cumulative);
      if (l.contains("solver")) {
        const auto s = l.at("solver").get<std::string>();
        if (s == "direct") o.solver = ResponseSolver::Direct;
        else if (s == "dynamics") o.solver = ResponseSolver::Dynamics;
        else throw InvalidArgument("unknown solver '" + s + "'");
      }
      read(l, "tolerance", o.tolerance);
      read(l, "max_sweeps", o.max_sweeps);
      read(l, "dynamics_step", o.dynamics_step);
      read(l, "checkpoint_interval", o.checkpoint_interval);
      read(l, "snapshot_steps", o.snapshot_steps);
      read(l, "probe_size", o.probe_size);
      read(l, "objective_interval", o.objective_interval);
      read(l, "collapse_cosine", o.collapse_cosine);
    }
    if (j.contains("baseline")) {
      read(j["baseline"], "K", c.baseline.K);
      read(j["baseline"], "kmeans_max_iter", c.baseline.kmeans_max_iter);
      read(j["baseline"], "max_pairs", c.baseline.max_pairs);
    }
    if (j.contains("detector")) {
      const json& d = j.at("detector");
      if (d.contains("kind")) c.detector.kind = detector_kind_from_string(d.at("kind").get<std::string>());
      read(d, "lambda", c.detector.lambda);
      read(d, "keep_series", c.detector.keep_series);
      if (d.contains("grating")) {
        const json& g = d.at("grating");
        GratingParams& p = c.detector.grating;
        read(g, "n", p.n);
        read(g, "wavelength", p.wavelength);
        read(g, "temporal_frequency", p.temporal_frequency);
        read(g, "contrast", p.contrast);
        read(g, "steps", p.steps);
        read(g, "phase0", p.phase0);
        read(g, "tau", p.tau);
      }
      if (d.contains("sweep")) {
        const json& s = d.at("sweep");
        if (s.contains("axis")) c.detector.sweep.axis = sweep_axis_from_string(s.at("axis").get<std::string>());
        read(s, "values", c.detector.sweep.values);
      }
    }
    if (j.contains("equiv")) {
      const json& e = j.at("equiv");
      read(e, "streams", c.equiv.streams);
      read(e, "taus", c.equiv.taus);
      read(e, "half_widths", c.equiv.half_widths);
      read(e, "steps", c.equiv.steps);
      read(e, "periodic", c.equiv.periodic);
    }
    if (j.contains("rotate_demo")) {
      const json& r = j.at("rotate_demo");
      read(r, "steps", c.rotate_demo.steps);
      read(r, "theta", c.rotate_demo.theta);
      read(r, "bar_width", c.rotate_demo.bar_width);
    }
    if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::map<std::string, double>>();
    if (j.contains("output")) read(j["output"], "dir", c.output_dir);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }

  if (c.data.episodes < 1) throw InvalidArgument("data.episodes must be >= 1");
  if (c.data.steps < 2) throw InvalidArgument("data.steps must be >= 2");
  if (c.seeds.empty()) throw InvalidArgument("seeds must not be empty");
  if (c.learner.K < 1) throw InvalidArgument("learner.K must be >= 1");
  if (c.stimulus.n < 3) throw InvalidArgument("stimulus.n must be >= 3");
  if (!(c.stimulus.contrast > 0.0)) throw InvalidArgument("stimulus.contrast must be > 0");
  if (c.whitening.epsilon < 0.0) throw InvalidArgument("whitening.epsilon must be >= 0");
  if (c.detector.grating.tau < 1) throw InvalidArgument("detector.grating.tau must be >= 1");
  if (!(c.detector.lambda > 0.0)) throw InvalidArgument("detector.lambda must be > 0");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

json apply_overrides(json document, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("override '" + a + "' is not key=value");
    const std::string path = a.substr(0, eq);
    const std::string text = a.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::exception&) {
      value = text;
    }
    json* node = &document;
    std::stringstream parts(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(parts, key, '.')) {
      if (key.empty()) throw InvalidArgument("override path '" + path + "' has an empty segment");
      keys.push_back(key);
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
      if (!node->is_object()) throw InvalidArgument("override path '" + path + "' crosses a non-object");
      node = &(*node)[keys[i]];
      if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw InvalidArgument("override path '" + path + "' crosses a non-object");
    (*node)[keys.back()] = value;
  }
  return document;
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("output");
  const std::string canonical = j.dump();
  return hex64(fnv1a64(canonical.data(), canonical.size()));
}

double threshold(const ExperimentConfig& config, const std::string& key, double fallback) {
  const auto it = config.thresholds.find(key);
  return it == config.thresholds.end() ? fallback : it->second;
}

}  // namespace motionsm
