#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "motionsm/config.hpp"
#include "motionsm/detector.hpp"
#include "motionsm/experiment.hpp"
#include "motionsm/io.hpp"
#include "motionsm/metrics.hpp"

namespace py = pybind11;
using namespace motionsm;

namespace {

// Configs and structured results cross the boundary as JSON text; the Python
// package turns them into dicts.
ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

py::dict state_dict(const LearnerState& s) {
  py::dict d;
  d["mode"] = to_string(s.mode);
  d["n"] = s.n;
  d["W"] = s.W;
  d["M"] = s.M;
  d["cumulative"] = s.cumulative;
  d["step"] = s.step;
  d["seed"] = s.seed;
  return d;
}

LearnerState state_from(const RowMatrix& W, const Matrix& M, const Vector& cumulative, const std::string& mode) {
  if (M.rows() != W.rows() || M.cols() != W.rows() || cumulative.size() != W.rows())
    throw InvalidArgument("W, M and cumulative disagree on the number of channels");
  LearnerState s;
  s.mode = learner_mode_from_string(mode);
  s.n = side_of(W.cols());
  s.W = W;
  s.M = M;
  s.cumulative = cumulative;
  return s;
}

std::string scores_json(const RowMatrix& W, const StimulusSpec& spec) {
  json out = json::array();
  for (const auto& s : score_operators(W, spec)) {
    out.push_back({{"index", s.index},
                   {"best_target", s.best_target},
                   {"target_cosine", s.target_cosine},
                   {"antisymmetry_ratio", s.antisymmetry},
                   {"toeplitz_shift_score", std::isfinite(s.toeplitz) ? json(s.toeplitz) : json(nullptr)}});
  }
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transformation operators learned by similarity matching, plus fixed motion detectors.";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<OutOfRange>(m, "OutOfRange", PyExc_IndexError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) { return to_json(parse_config(text)).dump(); });
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });
  m.def("apply_overrides", [](const std::string& text, const std::vector<std::string>& sets) {
    return apply_overrides(json::parse(text), sets).dump();
  });

  m.def(
      "generate",
      [](const std::string& text, std::uint64_t seed) {
        const ExperimentConfig c = parse_config(text);
        py::list out;
        py::gil_scoped_release release;
        auto seqs = generate_episodes(c.stimulus, c.data.episodes, c.data.steps, seed);
        py::gil_scoped_acquire acquire;
        for (auto& s : seqs) out.append(py::make_tuple(s.frames, s.ground_truth));
        return out;
      },
      py::arg("config"), py::arg("seed"));

  m.def(
      "fit_zca",
      [](const RowMatrix& frames, double epsilon, bool relative) {
        const WhiteningTransform w =
            fit_zca(frames, epsilon, relative ? EpsilonScale::RelativeToLargest : EpsilonScale::Absolute);
        return py::make_tuple(w.matrix, w.mean);
      },
      py::arg("frames"), py::arg("epsilon"), py::arg("relative") = true);

  m.def(
      "feature",
      [](const std::string& kind, const Vector& x, const Vector& x_next) {
        return make_feature(feature_kind_from_string(kind), x, x_next);
      },
      py::arg("kind"), py::arg("x"), py::arg("x_next"));

  m.def(
      "respond",
      [](const RowMatrix& W, const Matrix& M, const std::string& mode, const Vector& chi) {
        const Response r = respond(state_from(W, M, Vector::Ones(W.rows()), mode), chi);
        return py::make_tuple(r.theta, r.converged, r.iterations);
      },
      py::arg("W"), py::arg("M"), py::arg("mode"), py::arg("chi"));

  m.def(
      "train",
      [](const std::string& text, std::uint64_t seed, bool record_theta) {
        const ExperimentConfig c = parse_config(text);
        TrainOptions o = c.train_options(seed);
        o.record_theta = record_theta;
        TrainingData data;
        TrainResult r;
        {
          py::gil_scoped_release release;
          data = prepare_training_data(c, seed);
          r = train(data.episodes, data.whitener, o);
        }
        py::dict d = state_dict(r.state);
        d["theta"] = r.trace.theta;
        d["whitening"] = data.whitener.matrix;
        d["whitening_mean"] = data.whitener.mean;
        d["warnings"] = r.trace.warnings;
        d["operators"] = scores_json(r.state.W, c.stimulus);
        d["mutual_cosines"] = mutual_cosines(r.state.W);
        return d;
      },
      py::arg("config"), py::arg("seed"), py::arg("record_theta") = false);

  m.def(
      "baselines",
      [](const std::string& text, std::uint64_t seed) {
        const ExperimentConfig c = parse_config(text);
        RowMatrix X;
        PcaResult pca;
        KmeansResult km;
        {
          py::gil_scoped_release release;
          const TrainingData data = prepare_training_data(c, seed);
          X = collect_features(data.episodes, data.whitener, c.learner.feature, c.baseline.max_pairs);
          pca = pca_features(X, c.baseline.K);
          km = kmeans_features(X, c.baseline.K, derive_seed(seed, 2), c.baseline.kmeans_max_iter);
        }
        py::dict d;
        d["pca"] = pca.components;
        d["pca_eigenvalues"] = pca.eigenvalues;
        d["pca_operators"] = scores_json(pca.components, c.stimulus);
        d["kmeans"] = km.centroids;
        d["kmeans_inertia"] = km.inertia;
        d["kmeans_operators"] = scores_json(km.centroids, c.stimulus);
        return d;
      },
      py::arg("config"), py::arg("seed"));

  m.def("pca", [](const RowMatrix& X, int K) { return pca_features(X, K).components; }, py::arg("features"),
        py::arg("K"));
  m.def(
      "kmeans",
      [](const RowMatrix& X, int K, std::uint64_t seed) {
        const KmeansResult r = kmeans_features(X, K, seed);
        return py::make_tuple(r.centroids, r.assignments, r.inertia);
      },
      py::arg("features"), py::arg("K"), py::arg("seed"));

  m.def("cartoon_matrix", &cartoon_matrix, py::arg("n"));
  m.def("rotation_generator", &rotation_generator, py::arg("side"));
  m.def("velocity_estimate", &velocity_estimate, py::arg("x"), py::arg("x_next"), py::arg("lam") = 1.0);
  m.def(
      "summed_output",
      [](const std::string& kind, const RowMatrix& stream, int tau) {
        return summed_output(detector_kind_from_string(kind), stream, tau);
      },
      py::arg("kind"), py::arg("stream"), py::arg("tau") = 1);
  m.def(
      "sweep",
      [](const std::string& text) {
        const ExperimentConfig c = parse_config(text);
        const TuningCurve curve =
            tuning_sweep(c.detector.kind, c.detector.grating, c.detector.sweep.axis, c.detector.sweep.values);
        json out = json::array();
        for (const auto& p : curve.points) {
          out.push_back({{"value", p.value},
                         {"contrast", p.contrast},
                         {"wavelength", p.wavelength},
                         {"temporal_frequency", p.temporal_frequency},
                         {"velocity", p.velocity},
                         {"mean", p.mean},
                         {"oscillation_frequency", p.oscillation.frequency}});
        }
        return out.dump();
      },
      py::arg("config"));
  m.def(
      "equivalence",
      [](const std::string& text, std::uint64_t seed) {
        const EquivalenceSummary s = run_equivalence(parse_config(text).equiv, seed);
        return py::make_tuple(s.worst_relative, s.worst_absolute, s.cases);
      },
      py::arg("config"), py::arg("seed"));
  m.def(
      "rotate_demo",
      [](const Matrix& op, double theta, int steps, double bar_width) {
        const RotateDemoResult r = rotate_demo(op, theta, steps, bar_width);
        return py::make_tuple(r.frames, r.correlation, r.calibration);
      },
      py::arg("op"), py::arg("theta"), py::arg("steps"), py::arg("bar_width"));
  m.def(
      "report",
      [](const std::vector<std::filesystem::path>& dirs, const std::string& stimulus, bool force,
         const std::filesystem::path& image_dir) {
        return compare_checkpoints(dirs, stimulus_from_json(json::parse(stimulus)), force, image_dir).dump();
      },
      py::arg("checkpoints"), py::arg("stimulus"), py::arg("force"), py::arg("image_dir"));
}
