#include <cmath>

#include "doctest.h"
#include "motionsm/baselines.hpp"
#include "motionsm/config.hpp"
#include "motionsm/detector.hpp"
#include "motionsm/experiment.hpp"
#include "motionsm/features.hpp"
#include "motionsm/learner.hpp"
#include "motionsm/metrics.hpp"
#include "motionsm/stimuli.hpp"
#include "test_util.hpp"

using namespace motionsm;

namespace {

LearnerState state_with(LearnerMode mode, const Matrix& M) {
  LearnerState s = init(static_cast<int>(M.rows()), 3, 1, mode);
  s.M = M;
  return s;
}

}  // namespace

TEST_SUITE("learner") {
  TEST_CASE("init") {
    const LearnerState a = init(2, 5, 7, LearnerMode::NSM);
    const LearnerState b = init(2, 5, 7, LearnerMode::NSM);
    CHECK(a.W == b.W);
    CHECK(a.W.rows() == 2);
    CHECK(a.W.cols() == 25);
    CHECK(a.M.isZero(0.0));
    CHECK(a.cumulative == Vector::Ones(2));
    const LearnerState one = init(1, 5, 7, LearnerMode::SM);
    CHECK(one.M.rows() == 1);
    CHECK(one.M(0, 0) == 0.0);
    CHECK_THROWS_AS(init(0, 5, 1, LearnerMode::SM), InvalidArgument);
    CHECK_THROWS_AS(init(-1, 5, 1, LearnerMode::SM), InvalidArgument);
  }

  TEST_CASE("init scale is 1/n") {
    const LearnerState s = init(50, 10, 3, LearnerMode::SM);
    const double var = s.W.squaredNorm() / static_cast<double>(s.W.size());
    CHECK(var == doctest::Approx(0.01).epsilon(0.05));
  }

  TEST_CASE("response without lateral weights") {
    LearnerState s = init(3, 4, 2, LearnerMode::SM);
    const FeatureVector chi = random_rows(16, 1, 3).col(0);
    CHECK((respond(s, chi).theta - s.W * chi).cwiseAbs().maxCoeff() < 1e-14);
    s.mode = LearnerMode::NSM;
    CHECK((respond(s, chi).theta - (s.W * chi).cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("2x2 SM system by hand") {
    Matrix M(2, 2);
    M << 0, 0.5, 0.5, 0;
    const LearnerState s = state_with(LearnerMode::SM, M);
    const Response r = respond_to_drive(s, Eigen::Vector2d(1, 1));
    CHECK(r.theta[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(r.theta[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("NSM rectification") {
    const LearnerState s = state_with(LearnerMode::NSM, Matrix::Zero(2, 2));
    const Response r = respond_to_drive(s, Eigen::Vector2d(1, -1));
    CHECK(r.theta == Eigen::Vector2d(1, 0));
  }

  TEST_CASE("NSM with lateral inhibition matches the hand solution") {
    // Drive (2, 1), M12 = M21 = 0.5: both active gives (2 - 0.5 t2, 1 - 0.5 t1)
    // -> t1 = 2, t2 = 0 (t2 = 1 - 1 = 0), which is a consistent fixed point.
    Matrix M(2, 2);
    M << 0, 0.5, 0.5, 0;
    const Response r = respond_to_drive(state_with(LearnerMode::NSM, M), Eigen::Vector2d(2, 1));
    CHECK(r.converged);
    CHECK(r.theta[0] == doctest::Approx(2.0));
    CHECK(std::abs(r.theta[1]) < 1e-12);
  }

  TEST_CASE("singular SM system") {
    Matrix M(2, 2);
    M << 0, 1, 1, 0;
    CHECK_THROWS_AS(respond_to_drive(state_with(LearnerMode::SM, M), Eigen::Vector2d(1, 1)), NumericalFailure);
  }

  TEST_CASE("NSM sweep cap returns the last iterate unconverged") {
    // Mutual excitation past unit gain has no fixed point.
    Matrix M(2, 2);
    M << 0, -1.5, -1.5, 0;
    ResponseOptions o;
    o.max_sweeps = 3;
    const Response r = respond_to_drive(state_with(LearnerMode::NSM, M), Eigen::Vector2d(1, 1.2), o);
    CHECK(r.iterations == 3);
    CHECK_FALSE(r.converged);
    CHECK(r.theta.minCoeff() >= 0.0);
  }

  TEST_CASE("dynamics solver reaches the direct fixed point") {
    Matrix M(3, 3);
    M << 0, 0.2, -0.1, 0.3, 0, 0.25, -0.2, 0.1, 0;
    ResponseOptions dyn;
    dyn.solver = ResponseSolver::Dynamics;
    dyn.tolerance = 1e-13;
    for (LearnerMode mode : {LearnerMode::SM, LearnerMode::NSM}) {
      const LearnerState s = state_with(mode, M);
      const Vector drive = Eigen::Vector3d(0.7, -0.4, 1.1);
      const Response a = respond_to_drive(s, drive);
      const Response b = respond_to_drive(s, drive, dyn);
      CHECK(b.converged);
      CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  TEST_CASE("update by hand") {
    SUBCASE("K = 1") {
      LearnerState s = init(1, 3, 1, LearnerMode::SM);
      s.W.setZero();
      FeatureVector chi = FeatureVector::Zero(9);
      chi[4] = 2.0;
      update(s, chi, Vector::Ones(1));
      CHECK(s.cumulative[0] == 2.0);
      CHECK(s.W(0, 4) == 1.0);
      CHECK(s.W.sum() == 1.0);
      CHECK(s.step == 1);
    }
    SUBCASE("lateral weight") {
      LearnerState s = init(2, 3, 1, LearnerMode::SM);
      update(s, FeatureVector::Zero(9), Vector::Ones(2));
      CHECK(s.cumulative == Eigen::Vector2d(2, 2));
      CHECK(s.M(0, 1) == 0.5);
      CHECK(s.M(1, 0) == 0.5);
      CHECK(s.M(0, 0) == 0.0);
    }
    SUBCASE("silent outputs leave W and M unchanged") {
      LearnerState s = init(2, 3, 5, LearnerMode::NSM);
      const LearnerState before = s;
      update(s, random_rows(9, 1, 1).col(0), Vector::Zero(2));
      CHECK(s.W == before.W);
      CHECK(s.M == before.M);
      CHECK(s.cumulative == before.cumulative);
      CHECK(s.step == 1);
    }
    SUBCASE("non-finite input") {
      LearnerState s = init(1, 3, 1, LearnerMode::SM);
      FeatureVector chi = FeatureVector::Zero(9);
      chi[0] = std::nan("");
      CHECK_THROWS_AS(update(s, chi, Vector::Ones(1)), NumericalFailure);
    }
  }

  TEST_CASE("operator reshape") {
    LearnerState s = init(2, 4, 1, LearnerMode::SM);
    s.W.row(1) = vec(Matrix::Identity(4, 4)).transpose();
    CHECK(operator_matrix(s, 1) == Matrix::Identity(4, 4));
    CHECK(vec(operator_matrix(s, 0)).transpose() == s.W.row(0));
    CHECK_THROWS_AS(operator_matrix(s, 2), OutOfRange);
    CHECK_THROWS_AS(operator_matrix(s, -1), OutOfRange);
  }

  TEST_CASE("identical frames leave W at its initial value") {
    FrameSequence seq;
    seq.frames = RowMatrix::Ones(50, 4);
    TrainOptions o;
    o.K = 2;
    o.seed = 9;
    const TrainResult r = train(seq, WhiteningTransform::identity(4), o);
    CHECK(r.state.W == init(2, 4, 9, LearnerMode::SM).W);
    CHECK(r.trace.theta.isZero(0.0));
    CHECK(r.state.step == 49);
  }

  TEST_CASE("training trace, snapshots and objective") {
    StimulusSpec spec;
    spec.n = 5;
    spec.aperture_sigma = 1.0;
    spec.motion.type = MotionType::UniformJitter;
    spec.motion.amplitude = 0.5;
    const FrameSequence seq = generate_sequence(spec, 2001, 4);
    TrainOptions o;
    o.K = 1;
    o.snapshot_interval = 500;
    o.objective_interval = 1000;
    o.probe_size = 100;
    const TrainResult r = train(seq, WhiteningTransform::identity(5), o);
    CHECK(r.trace.theta.rows() == 2000);
    CHECK(r.trace.snapshots.size() == 4);
    CHECK(r.trace.snapshots.back().W == r.state.W);
    CHECK(r.trace.objective.size() == 2);
    CHECK(r.trace.objective.back().step == 2000);
  }

  TEST_CASE("collapsed NSM channels are reported") {
    LearnerState s = init(3, 3, 1, LearnerMode::NSM);
    s.W.row(2) = 2.0 * s.W.row(0);
    const auto pairs = collapsed_channels(s, 0.99);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::make_pair(0, 2));
  }

  TEST_CASE("SM learns the translation generator") {
    const ExperimentConfig c = load_config(std::string(MOTIONSM_CONFIG_DIR) + "/translation1d_sm.json");
    const TrainingData data = prepare_training_data(c, 1);
    TrainOptions o = c.train_options(1);
    o.record_theta = false;
    o.objective_interval = 0;
    const TrainResult r = train(data.episodes, data.whitener, o);
    CHECK(r.state.step == 200000);
    const Matrix a = operator_matrix(r.state, 0);
    CHECK(std::abs(cosine(a, cartoon_matrix(5))) > 0.9);
    CHECK(toeplitz_shift_score(a) > 0.9);
    // Logged next to the PCA operator on the same features for comparison.
    const PcaResult pca = pca_features(collect_features(data.episodes, data.whitener, c.learner.feature), 1);
    const double pca_asym = antisymmetry_ratio(unvec(pca.components.row(0).transpose(), 5));
    MESSAGE("antisymmetry learned " << antisymmetry_ratio(a) << ", PCA " << pca_asym);
    CHECK(antisymmetry_ratio(a) < 0.3);
  }
}
