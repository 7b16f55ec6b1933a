#include "motionsm/experiment.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "motionsm/detector.hpp"
#include "motionsm/features.hpp"
#include "motionsm/io.hpp"
#include "motionsm/metrics.hpp"

namespace motionsm {

TrainingData prepare_training_data(const ExperimentConfig& config, std::uint64_t seed) {
  TrainingData data;
  data.episodes = generate_episodes(config.stimulus, config.data.episodes, config.data.steps, derive_seed(seed, 1));
  const int d = config.stimulus.frame_size();
  if (!config.whitening.enabled) {
    data.whitener = WhiteningTransform::identity(d);
    return data;
  }
  long total = 0;
  for (const auto& ep : data.episodes) total += ep.steps();
  const long take = std::min<long>(total, std::max(config.whitening.prefix_frames, 2));
  RowMatrix prefix(take, d);
  long row = 0;
  for (const auto& ep : data.episodes) {
    const long chunk = std::min<long>(ep.steps(), take - row);
    prefix.middleRows(row, chunk) = ep.frames.topRows(chunk);
    row += chunk;
    if (row == take) break;
  }
  data.whitener = fit_zca(prefix, config.whitening.epsilon,
                          config.whitening.relative ? EpsilonScale::RelativeToLargest : EpsilonScale::Absolute);
  return data;
}

RowMatrix collect_features(const std::vector<FrameSequence>& episodes, const WhiteningTransform& whitener,
                           FeatureKind kind, long max_pairs) {
  long pairs = 0;
  for (const auto& ep : episodes) pairs += std::max(0, ep.steps() - 1);
  if (max_pairs > 0) pairs = std::min(pairs, max_pairs);
  if (episodes.empty() || pairs == 0) throw InsufficientData("no frame pairs");
  const Eigen::Index d = episodes.front().frames.cols();
  RowMatrix out(pairs, d * d);
  long row = 0;
  for (const auto& ep : episodes) {
    if (ep.steps() < 2) continue;
    const RowMatrix white = apply_rows(whitener, ep.frames);
    for (int t = 0; t + 1 < ep.steps() && row < pairs; ++t, ++row) {
      out.row(row) = make_feature(kind, white.row(t).transpose(), white.row(t + 1).transpose()).transpose();
    }
    if (row == pairs) break;
  }
  return out;
}

int operator_side(const StimulusSpec& spec) { return spec.n; }

std::vector<NamedOperator> analytic_targets(const StimulusSpec& spec) {
  if (spec.kind != StimulusKind::NoiseImage2D) return {{"translation", cartoon_matrix(spec.n)}};
  if (spec.transform == Transform2D::Rotation) return {{"rotation", rotation_generator(spec.n)}};
  return {{"+x", translation_generator(spec.n, 0, 1)},
          {"-x", translation_generator(spec.n, 0, -1)},
          {"+y", translation_generator(spec.n, 1, 1)},
          {"-y", translation_generator(spec.n, 1, -1)}};
}

std::vector<OperatorScore> score_operators(const RowMatrix& W, const StimulusSpec& spec) {
  const auto targets = analytic_targets(spec);
  const int d = side_of(W.cols());
  if (d != targets.front().matrix.rows()) {
    throw InvalidArgument("operator size " + std::to_string(d) + " does not match the stimulus (" +
                          std::to_string(targets.front().matrix.rows()) + ")");
  }
  std::vector<OperatorScore> out;
  for (Eigen::Index a = 0; a < W.rows(); ++a) {
    const Matrix op = unvec(W.row(a).transpose(), d);
    OperatorScore s;
    s.index = static_cast<int>(a);
    // A single target is sign-agnostic; signed target families pick the
    // direction with the largest signed cosine.
    for (const auto& t : targets) {
      const double c = cosine(op, t.matrix);
      const bool better = targets.size() == 1 ? std::abs(c) > std::abs(s.target_cosine) : c > s.target_cosine;
      if (s.best_target.empty() || better) {
        s.best_target = t.name;
        s.target_cosine = c;
      }
    }
    s.antisymmetry = antisymmetry_ratio(op);
    s.toeplitz = spec.kind == StimulusKind::NoiseImage2D || d < 4 ? std::numeric_limits<double>::quiet_NaN()
                                                                  : toeplitz_shift_score(op);
    out.push_back(s);
  }
  return out;
}

Matrix mutual_cosines(const RowMatrix& W) {
  const Eigen::Index k = W.rows();
  Matrix c(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) c(a, b) = cosine(Vector(W.row(a).transpose()), Vector(W.row(b).transpose()));
  return c;
}

DirectionPreference grating_preference(const LearnerState& state, const WhiteningTransform& whitener,
                                       FeatureKind kind, const std::vector<double>& wavelengths,
                                       const std::vector<double>& speeds, int steps, const ResponseOptions& options) {
  if (wavelengths.empty() || speeds.empty()) throw InvalidArgument("no probe gratings");
  const int k = state.channels();
  DirectionPreference p;
  p.mean_response = Matrix::Zero(k, 2);
  long count[2] = {0, 0};
  for (int dir = 0; dir < 2; ++dir) {
    const double sign = dir == 0 ? 1.0 : -1.0;
    for (double wl : wavelengths) {
      for (double v : speeds) {
        const FrameSequence g = generate_grating(state.n, wl, sign * v / wl, 1.0, steps);
        const RowMatrix white = apply_rows(whitener, g.frames);
        for (int t = 0; t + 1 < g.steps(); ++t) {
          const FeatureVector chi = make_feature(kind, white.row(t).transpose(), white.row(t + 1).transpose());
          p.mean_response.col(dir) += respond(state, chi, options).theta;
          ++count[dir];
        }
      }
    }
  }
  p.mean_response.col(0) /= static_cast<double>(count[0]);
  p.mean_response.col(1) /= static_cast<double>(count[1]);
  p.ratio.resize(k);
  p.preferred.resize(k);
  for (int a = 0; a < k; ++a) {
    const double right = p.mean_response(a, 0);
    const double left = p.mean_response(a, 1);
    p.preferred[a] = right >= left ? 1 : -1;
    const double hi = std::max(right, left);
    const double lo = std::min(right, left);
    p.ratio[a] = lo > 0.0 ? hi / lo : (hi > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return p;
}

Matrix diagonal_bar(int side, double width) {
  if (side < 3) throw InvalidArgument("bar image needs side >= 3");
  if (!(width > 0.0)) throw InvalidArgument("bar width must be > 0");
  Matrix img(side, side);
  const double c = 0.5 * (side - 1);
  for (int r = 0; r < side; ++r) {
    for (int col = 0; col < side; ++col) {
      const double dist = ((col - c) - (r - c)) / std::numbers::sqrt2;
      img(r, col) = std::exp(-0.5 * dist * dist / (width * width));
    }
  }
  return img;
}

RotateDemoResult rotate_demo(const Matrix& op, double theta, int steps, double bar_width) {
  if (op.rows() != op.cols()) throw InvalidArgument("operator must be square");
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(op.rows()))));
  if (side * side != op.rows() || side < 3) throw InvalidArgument("operator is not a square-patch operator");
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  const Matrix g = rotation_generator(side);
  const double overlap = (op.array() * g.array()).sum();
  if (overlap == 0.0) throw NumericalFailure("operator has no rotational component");
  RotateDemoResult r;
  r.calibration = g.squaredNorm() / overlap;

  const Matrix bar = diagonal_bar(side, bar_width);
  RowMatrix bar_rows = bar;
  Vector x = Eigen::Map<const Vector>(bar_rows.data(), bar_rows.size());
  r.frames.push_back(bar);
  for (int k = 1; k <= steps; ++k) {
    x += theta * r.calibration * (op * x);
    if (!x.allFinite()) throw NumericalFailure("rotate demo diverged");
    const RowMatrix target = rotate_image_bilinear(bar_rows, k * theta);
    const Vector target_vec = Eigen::Map<const Vector>(target.data(), target.size());
    r.correlation.push_back(pearson(x, target_vec));
    r.frames.push_back(Eigen::Map<const RowMatrix>(x.data(), side, side));
  }
  return r;
}

EquivalenceSummary run_equivalence(const EquivConfig& config, std::uint64_t seed) {
  if (config.streams < 1) throw InvalidArgument("equiv.streams must be >= 1");
  if (config.taus.empty() || config.half_widths.empty()) throw InvalidArgument("equiv needs taus and half_widths");
  EquivalenceSummary s;
  for (int stream = 0; stream < config.streams; ++stream) {
    for (int h : config.half_widths) {
      if (h < 1) throw InvalidArgument("half widths must be >= 1");
      const int width = 2 * h + 3;
      std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(stream) * 1000 + h));
      std::normal_distribution<double> normal(0.0, 1.0);
      RowMatrix x(config.steps, width);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
      for (int tau : config.taus) {
        const EquivalenceReport r = config.periodic ? global_equivalence_check_periodic(x, tau)
                                                    : global_equivalence_check(x, tau, 1, width - 2);
        s.worst_relative = std::max(s.worst_relative, r.max_relative);
        s.worst_absolute = std::max(s.worst_absolute, r.max_residual);
        ++s.cases;
        s.rows.push_back({{"stream", stream},
                          {"half_width", h},
                          {"tau", tau},
                          {"max_residual", r.max_residual},
                          {"scale", r.scale},
                          {"max_relative", r.max_relative}});
      }
    }
  }
  return s;
}

Matrix operator_image(const Matrix& op) {
  const int d = static_cast<int>(op.rows());
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d))));
  if (side * side != d || op.cols() != d) return op;
  Matrix img(d, d);
  for (int p = 0; p < d; ++p) {
    const int tr = p / side;
    const int tc = p % side;
    for (int q = 0; q < d; ++q) img(tr * side + q / side, tc * side + q % side) = op(p, q);
  }
  return img;
}

nlohmann::json compare_checkpoints(const std::vector<std::filesystem::path>& dirs, const StimulusSpec& spec,
                                   bool force, const std::filesystem::path& image_dir) {
  if (dirs.empty()) throw InvalidArgument("report needs at least one checkpoint");
  std::vector<Checkpoint> checkpoints;
  for (const auto& d : dirs) checkpoints.push_back(load_checkpoint(d));
  const int n = checkpoints.front().state.n;
  const std::string hash = checkpoints.front().manifest.value("config_hash", std::string());
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i].state.n != n) throw InvalidArgument("checkpoints have different operator sizes");
    const std::string other = checkpoints[i].manifest.value("config_hash", std::string());
    if (other != hash && !force) {
      throw InvalidArgument("checkpoints come from different configs (" + hash + " vs " + other +
                            "); pass --force to compare anyway");
    }
  }

  nlohmann::json report;
  report["checkpoints"] = nlohmann::json::array();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const Checkpoint& c = checkpoints[i];
    nlohmann::json entry;
    entry["path"] = dirs[i].string();
    entry["source"] = c.manifest.value("source", std::string("learner"));
    entry["config_hash"] = c.manifest.value("config_hash", std::string());
    entry["seed"] = c.state.seed;
    entry["mode"] = to_string(c.state.mode);
    entry["steps"] = c.state.step;
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& s : score_operators(c.state.W, spec)) {
      nlohmann::json o = {{"index", s.index},
                          {"best_target", s.best_target},
                          {"target_cosine", s.target_cosine},
                          {"antisymmetry_ratio", s.antisymmetry}};
      o["toeplitz_shift_score"] = std::isnan(s.toeplitz) ? nlohmann::json(nullptr) : nlohmann::json(s.toeplitz);
      const std::string stem = "ckpt" + std::to_string(i) + "_op" + std::to_string(s.index) + ".pgm";
      const PgmAffine affine = write_pgm(image_dir / stem, operator_image(operator_matrix(c.state, s.index)));
      o["image"] = stem;
      o["affine"] = to_json(affine);
      ops.push_back(o);
    }
    entry["operators"] = ops;
    const Matrix mc = mutual_cosines(c.state.W);
    nlohmann::json mutual = nlohmann::json::array();
    for (Eigen::Index a = 0; a < mc.rows(); ++a)
      for (Eigen::Index b = a + 1; b < mc.cols(); ++b) mutual.push_back({{"a", a}, {"b", b}, {"cosine", mc(a, b)}});
    entry["mutual_cosines"] = mutual;
    report["checkpoints"].push_back(entry);
  }
  nlohmann::json angles = nlohmann::json::array();
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    for (std::size_t j = i + 1; j < checkpoints.size(); ++j) {
      const Vector pa = principal_angles(checkpoints[i].state.W, checkpoints[j].state.W);
      std::vector<double> deg(pa.size());
      for (Eigen::Index k = 0; k < pa.size(); ++k) deg[k] = pa[k] * 180.0 / std::numbers::pi;
      angles.push_back({{"a", i}, {"b", j}, {"principal_angles_deg", deg}, {"largest_deg", deg.back()}});
    }
  }
  report["principal_angles"] = angles;
  return report;
}

}  // namespace motionsm
