#include "motionsm/learner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/LU>

namespace motionsm {

namespace {

using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap channel_operator(const LearnerState& state, int a) {
  return ConstMatrixMap(state.W.row(a).data(), state.n, state.n);
}

Response solve_sm(const LearnerState& state, const Vector& drive) {
  const int k = state.channels();
  const Matrix system = Matrix::Identity(k, k) + state.M;
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() > 1e-13)) throw NumericalFailure("(I + M) is singular");
  Response r;
  r.theta = lu.solve(drive);
  r.iterations = 1;
  if (!r.theta.allFinite()) throw NumericalFailure("non-finite SM response");
  return r;
}

Response solve_nsm(const LearnerState& state, const Vector& drive, const ResponseOptions& options) {
  const int k = state.channels();
  Response r;
  r.theta = Vector::Zero(k);
  r.converged = false;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int a = 0; a < k; ++a) {
      double v = drive[a];
      for (int b = 0; b < k; ++b)
        if (b != a) v -= state.M(a, b) * r.theta[b];
      v = std::max(v, 0.0);
      change = std::max(change, std::abs(v - r.theta[a]));
      r.theta[a] = v;
    }
    r.iterations = sweep;
    if (change < options.tolerance) {
      r.converged = true;
      break;
    }
  }
  if (!r.theta.allFinite()) throw NumericalFailure("non-finite NSM response");
  return r;
}

Response solve_dynamics(const LearnerState& state, const Vector& drive, const ResponseOptions& options) {
  const bool rectify = state.mode == LearnerMode::NSM;
  Response r;
  r.theta = Vector::Zero(state.channels());
  r.converged = false;
  for (int it = 1; it <= options.dynamics_max_iterations; ++it) {
    Vector next = r.theta + options.dynamics_step * (drive - state.M * r.theta - r.theta);
    if (rectify) next = next.cwiseMax(0.0);
    const double change = (next - r.theta).cwiseAbs().maxCoeff();
    r.theta = std::move(next);
    r.iterations = it;
    if (!r.theta.allFinite()) throw NumericalFailure("response dynamics diverged");
    if (change < options.tolerance) {
      r.converged = true;
      break;
    }
  }
  return r;
}

double cosine(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  return na > 0.0 && nb > 0.0 ? a.dot(b) / (na * nb) : 0.0;
}

}  // namespace

std::string to_string(LearnerMode mode) { return mode == LearnerMode::NSM ? "NSM" : "SM"; }

LearnerMode learner_mode_from_string(const std::string& s) {
  if (s == "SM" || s == "sm") return LearnerMode::SM;
  if (s == "NSM" || s == "nsm") return LearnerMode::NSM;
  throw InvalidArgument("unknown learner mode '" + s + "'");
}

LearnerState init(int K, int n, std::uint64_t seed, LearnerMode mode, double initial_cumulative) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (n < 3) throw InvalidArgument("n must be >= 3");
  if (!(initial_cumulative > 0.0)) throw InvalidArgument("initial cumulative activity must be > 0");
  LearnerState s;
  s.mode = mode;
  s.n = n;
  s.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / n);
  s.W.resize(K, static_cast<Eigen::Index>(n) * n);
  for (Eigen::Index a = 0; a < s.W.rows(); ++a)
    for (Eigen::Index j = 0; j < s.W.cols(); ++j) s.W(a, j) = normal(rng);
  s.M = Matrix::Zero(K, K);
  s.cumulative = Vector::Constant(K, initial_cumulative);
  return s;
}

Vector feedforward(const LearnerState& state, const FeatureVector& chi) {
  if (chi.size() != state.W.cols()) {
    throw InvalidArgument("feature length " + std::to_string(chi.size()) + " != n^2 = " +
                          std::to_string(state.W.cols()));
  }
  return state.W * chi;
}

Vector feedforward_rank1(const LearnerState& state, FeatureKind kind, const Frame& x, const Frame& x_next) {
  if (x.size() != state.n || x_next.size() != state.n) throw InvalidArgument("frame length does not match learner n");
  const Vector dx = x_next - x;
  Vector out(state.channels());
  for (int a = 0; a < state.channels(); ++a) {
    const auto op = channel_operator(state, a);
    double acc = 0.0;
    switch (kind) {
      case FeatureKind::Standard:
        for (int i = 0; i < state.n; ++i) acc += dx[i] * op.row(i).dot(x);
        break;
      case FeatureKind::Midpoint:
        for (int i = 0; i < state.n; ++i) acc += (x_next[i] + x[i]) * op.row(i).dot(dx);
        break;
      case FeatureKind::Antisymmetric:
        for (int i = 0; i < state.n; ++i) acc += x_next[i] * op.row(i).dot(x) - x[i] * op.row(i).dot(x_next);
        break;
    }
    out[a] = acc;
  }
  return out;
}

Response respond_to_drive(const LearnerState& state, const Vector& drive, const ResponseOptions& options) {
  if (drive.size() != state.channels()) throw InvalidArgument("drive length does not match K");
  if (!drive.allFinite()) throw NumericalFailure("non-finite feedforward drive");
  if (options.solver == ResponseSolver::Dynamics) return solve_dynamics(state, drive, options);
  return state.mode == LearnerMode::SM ? solve_sm(state, drive) : solve_nsm(state, drive, options);
}

Response respond(const LearnerState& state, const FeatureVector& chi, const ResponseOptions& options) {
  return respond_to_drive(state, feedforward(state, chi), options);
}

void update(LearnerState& state, const FeatureVector& chi, const Vector& theta) {
  const int k = state.channels();
  if (chi.size() != state.W.cols()) throw InvalidArgument("feature length does not match n^2");
  if (theta.size() != k) throw InvalidArgument("response length does not match K");
  if (!chi.allFinite() || !theta.allFinite()) throw NumericalFailure("non-finite input to update");

  for (int a = 0; a < k; ++a) state.cumulative[a] += theta[a] * theta[a];
  for (int a = 0; a < k; ++a) {
    const double th = theta[a];
    if (th == 0.0) continue;
    const double rate = th / state.cumulative[a];
    state.W.row(a) += rate * (chi.transpose() - th * state.W.row(a));
    for (int b = 0; b < k; ++b) {
      if (b == a) continue;
      state.M(a, b) += rate * (theta[b] - state.M(a, b) * th);
    }
  }
  ++state.step;
}

Matrix operator_matrix(const LearnerState& state, int a) {
  if (a < 0 || a >= state.channels()) {
    throw OutOfRange("operator index " + std::to_string(a) + " outside [0, " + std::to_string(state.channels()) + ")");
  }
  return Matrix(channel_operator(state, a));
}

double sm_objective(const LearnerState& state, const RowMatrix& probe_features, const ResponseOptions& options) {
  const Eigen::Index p = probe_features.rows();
  if (p == 0) return 0.0;
  RowMatrix theta(p, state.channels());
  for (Eigen::Index t = 0; t < p; ++t) {
    theta.row(t) = respond(state, probe_features.row(t).transpose(), options).theta.transpose();
  }
  const Matrix gram_in = probe_features * probe_features.transpose();
  const Matrix gram_out = theta * theta.transpose();
  return (gram_in - gram_out).squaredNorm() / static_cast<double>(p * p);
}

std::vector<std::pair<int, int>> collapsed_channels(const LearnerState& state, double threshold) {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < state.channels(); ++a)
    for (int b = a + 1; b < state.channels(); ++b)
      if (cosine(state.W.row(a).transpose(), state.W.row(b).transpose()) > threshold) out.emplace_back(a, b);
  return out;
}

TrainResult train(std::span<const FrameSequence> episodes, const WhiteningTransform& whitener,
                  const TrainOptions& options) {
  if (episodes.empty()) throw InvalidArgument("no training episodes");
  const int n = static_cast<int>(episodes.front().frames.cols());
  long pairs = 0;
  for (const auto& ep : episodes) {
    if (ep.frames.cols() != n) throw InvalidArgument("episodes have different frame sizes");
    pairs += std::max<long>(0, ep.steps() - 1);
  }
  if (pairs < 1) throw InvalidArgument("training needs at least 2 frames");
  if (whitener.size() != n) throw InvalidArgument("whitener size does not match frame size");

  TrainResult result;
  result.state = init(options.K, n, options.seed, options.mode, options.initial_cumulative);
  LearnerState& state = result.state;
  TrainTrace& trace = result.trace;
  if (options.record_theta) trace.theta.resize(pairs, options.K);

  std::vector<long> snapshot_steps = options.snapshot_steps;
  std::sort(snapshot_steps.begin(), snapshot_steps.end());
  auto wants_snapshot = [&](long step) {
    if (options.snapshot_interval > 0 && step % options.snapshot_interval == 0) return true;
    return std::binary_search(snapshot_steps.begin(), snapshot_steps.end(), step);
  };

  // Fixed probe batch: the first probe_size pairs.
  RowMatrix probe;
  if (options.objective_interval > 0 && options.probe_size > 0) {
    const long p = std::min<long>(options.probe_size, pairs);
    probe.resize(p, static_cast<Eigen::Index>(n) * n);
    long row = 0;
    for (const auto& ep : episodes) {
      for (int t = 0; t + 1 < ep.steps() && row < p; ++t, ++row) {
        probe.row(row) = make_feature(options.feature, apply(whitener, ep.frame(t)), apply(whitener, ep.frame(t + 1)))
                             .transpose();
      }
      if (row >= p) break;
    }
  }

  auto checkpoint = [&](long step) {
    if (options.objective_interval > 0 && probe.rows() > 0 && step % options.objective_interval == 0) {
      trace.objective.push_back({step, sm_objective(state, probe, options.response)});
    }
    if (wants_snapshot(step)) {
      trace.snapshots.push_back({step, state.W});
      if (state.mode == LearnerMode::NSM) {
        for (auto [a, b] : collapsed_channels(state, options.collapse_cosine)) {
          std::ostringstream msg;
          msg << "step " << step << ": NSM channels " << a << " and " << b << " share one filter (cosine > "
              << options.collapse_cosine << ")";
          trace.warnings.push_back(msg.str());
        }
      }
    }
  };

  long step = 0;
  for (const auto& ep : episodes) {
    if (ep.steps() < 2) continue;
    Frame current = apply(whitener, ep.frame(0));
    for (int t = 0; t + 1 < ep.steps(); ++t) {
      Frame next = apply(whitener, ep.frame(t + 1));
      const FeatureVector chi = make_feature(options.feature, current, next);
      const Response r = respond(state, chi, options.response);
      if (!r.converged) ++trace.nonconverged;
      if (options.record_theta) trace.theta.row(step) = r.theta.transpose();
      update(state, chi, r.theta);
      ++step;
      checkpoint(step);
      current = std::move(next);
    }
  }
  if (trace.nonconverged > 0) {
    trace.warnings.push_back(std::to_string(trace.nonconverged) + " responses hit the NSM sweep cap");
  }
  if (options.objective_interval > 0 && probe.rows() > 0 &&
      (trace.objective.empty() || trace.objective.back().step != step)) {
    trace.objective.push_back({step, sm_objective(state, probe, options.response)});
  }
  return result;
}

TrainResult train(const FrameSequence& stream, const WhiteningTransform& whitener, const TrainOptions& options) {
  return train(std::span<const FrameSequence>(&stream, 1), whitener, options);
}

}  // namespace motionsm
