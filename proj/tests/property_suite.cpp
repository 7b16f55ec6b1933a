#include "property_suite.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "motionsm/features.hpp"
#include "motionsm/learner.hpp"
#include "motionsm/preprocess.hpp"
#include "oracles.hpp"

namespace motionsm::testing {

namespace {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  Vector vector(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
};

void record(PropertyResult& r, bool ok, double measure, int index, const std::string& what) {
  ++r.cases;
  r.worst = std::max(r.worst, measure);
  if (!ok) {
    if (r.failures == 0) {
      std::ostringstream msg;
      msg << "case " << index << ": " << what << " (" << measure << ")";
      r.first_failure = msg.str();
    }
    ++r.failures;
  }
}

// Random state whose lateral weights have row absolute sums below 0.9, so the
// NSM fixed point is unique and coordinate descent contracts.
LearnerState random_state(Rng& rng, LearnerMode mode, int K, int n) {
  LearnerState s = init(K, n, rng.engine(), mode, rng.uniform(0.5, 3.0));
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) {
      if (a != b) s.M(a, b) = rng.uniform(-1.0, 1.0);
    }
    const double row = s.M.row(a).cwiseAbs().sum();
    if (row > 0.0) s.M.row(a) *= rng.uniform(0.0, 0.9) / row;
  }
  return s;
}

Vector rectify(const Vector& v) { return v.cwiseMax(0.0); }

}  // namespace

std::vector<PropertyResult> run_property_suite(int cases, std::uint64_t seed) {
  PropertyResult sm_fixed{"sm_fixed_point_residual"};
  PropertyResult nsm_fixed{"nsm_fixed_point_residual"};
  PropertyResult nonneg{"nsm_nonnegativity"};
  PropertyResult hat{"cumulative_activity_monotone"};
  PropertyResult rate{"learning_rate_nonincreasing"};
  PropertyResult zca{"zca_identity_covariance"};
  PropertyResult roundtrip{"feature_reshape_roundtrip"};
  PropertyResult rank1{"rank1_path_equivalence"};

  Rng rng(seed);
  for (int c = 0; c < cases; ++c) {
    const int K = rng.integer(1, 4);
    const int n = rng.integer(3, 8);
    const Frame x = rng.vector(n);
    const Frame xn = x + rng.uniform(0.01, 1.0) * rng.vector(n);
    const FeatureKind kind = static_cast<FeatureKind>(c % 3);
    const FeatureVector chi = make_feature(kind, x, xn);

    {
      const LearnerState s = random_state(rng, LearnerMode::SM, K, n);
      const Vector drive = s.W * chi;
      const Response r = respond(s, chi);
      const Matrix system = Matrix::Identity(K, K) + s.M;
      const double res = (system * r.theta - drive).norm();
      const double tol = 1e-10 * std::max(drive.norm(), 1e-300);
      record(sm_fixed, res <= tol, res / std::max(drive.norm(), 1e-300), c, "SM residual above 1e-10 relative");
    }
    {
      const LearnerState s = random_state(rng, LearnerMode::NSM, K, n);
      const Vector drive = s.W * chi;
      const Response r = respond(s, chi);
      const double res = (r.theta - rectify(drive - s.M * r.theta)).norm();
      record(nsm_fixed, res <= 1e-8 && r.converged, res, c, "NSM residual above 1e-8");
      record(nonneg, r.theta.minCoeff() >= 0.0, std::max(0.0, -r.theta.minCoeff()), c, "negative NSM output");
    }
    {
      // A short training run on random features: cumulative activity never
      // decreases, stays put exactly when the channel is silent, and the step
      // size of every active channel shrinks.
      const LearnerMode mode = c % 2 == 0 ? LearnerMode::NSM : LearnerMode::SM;
      LearnerState s = random_state(rng, mode, K, n);
      bool ok_hat = true;
      bool ok_rate = true;
      double worst = 0.0;
      Vector last_rate = s.cumulative.cwiseInverse();
      for (int step = 0; step < 20; ++step) {
        const FeatureVector f = make_feature(kind, rng.vector(n), rng.vector(n));
        const Response r = respond(s, f);
        const Vector before = s.cumulative;
        update(s, f, r.theta);
        for (int a = 0; a < K; ++a) {
          const double grow = s.cumulative[a] - before[a];
          worst = std::max(worst, -grow);
          if (grow < 0.0 || (r.theta[a] == 0.0) != (grow == 0.0)) ok_hat = false;
          const double step_size = 1.0 / s.cumulative[a];
          if (r.theta[a] != 0.0 && step_size > last_rate[a]) ok_rate = false;
          last_rate[a] = step_size;
        }
      }
      record(hat, ok_hat, worst, c, "cumulative activity decreased or moved while silent");
      record(rate, ok_rate, 0.0, c, "step size grew for an active channel");
    }
    {
      const int d = rng.integer(2, 6);
      const int frames = 50 + rng.integer(0, 100);
      Matrix mix(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) mix(i, j) = rng.normal();
      mix += 2.0 * Matrix::Identity(d, d);  // keep the covariance well conditioned
      RowMatrix data(frames, d);
      for (int t = 0; t < frames; ++t) data.row(t) = (mix * rng.vector(d)).transpose() + rng.vector(d).transpose();
      const WhiteningTransform w = fit_zca(data, 0.0);
      const RowMatrix white = apply_rows(w, data);
      const RowMatrix centred = white.rowwise() - white.colwise().mean();
      const Matrix cov = centred.transpose() * centred / static_cast<double>(frames);
      const double err = (cov - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
      const double asym = (w.matrix - w.matrix.transpose()).cwiseAbs().maxCoeff();
      record(zca, err <= 1e-8 && asym == 0.0, std::max(err, asym), c, "whitened covariance not identity");
    }
    {
      const Matrix f = unvec(chi, n);
      std::vector<double> ox(x.data(), x.data() + n), oxn(xn.data(), xn.data() + n);
      const oracle::Vec ref = kind == FeatureKind::Standard   ? oracle::feature_standard(ox, oxn)
                              : kind == FeatureKind::Midpoint ? oracle::feature_midpoint(ox, oxn)
                                                              : oracle::feature_antisymmetric(ox, oxn);
      double err = (vec(f) - chi).cwiseAbs().maxCoeff();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) err = std::max(err, std::abs(f(i, j) - ref[i * n + j]));
      record(roundtrip, err == 0.0, err, c, "vec/unvec or index convention mismatch");
    }
    {
      const LearnerState s = random_state(rng, c % 2 ? LearnerMode::SM : LearnerMode::NSM, K, n);
      const Vector flat = feedforward(s, chi);
      const Vector split = feedforward_rank1(s, kind, x, xn);
      const double scale = std::max(1.0, flat.cwiseAbs().maxCoeff());
      const double drive_err = (flat - split).cwiseAbs().maxCoeff() / scale;
      const Vector t_flat = respond_to_drive(s, flat).theta;
      const Vector t_split = respond_to_drive(s, split).theta;
      const double resp_err =
          (t_flat - t_split).cwiseAbs().maxCoeff() / std::max(1.0, t_flat.cwiseAbs().maxCoeff());
      const double err = std::max(drive_err, resp_err);
      record(rank1, err <= 1e-12, err, c, "per-pixel and flat responses differ");
    }
  }
  return {sm_fixed, nsm_fixed, nonneg, hat, rate, zca, roundtrip, rank1};
}

}  // namespace motionsm::testing
