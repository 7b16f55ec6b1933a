#include "motionsm/baselines.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace motionsm {

namespace {

void check_population(const RowMatrix& features, int K) {
  if (K < 1) throw InvalidArgument("K must be >= 1");
  if (features.rows() < K) throw InsufficientData("need at least K samples");
  if (features.cols() > 0 && K > features.cols()) throw InvalidArgument("K exceeds the feature dimension");
  if (!features.allFinite()) throw NumericalFailure("non-finite feature");
}

std::vector<double> nearest(const RowMatrix& features, const RowMatrix& centroids, std::vector<int>* labels) {
  const Eigen::Index n = features.rows();
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double d = (features.row(t) - centroids.row(c)).squaredNorm();
      if (d < best) {  // strict: ties keep the lowest index
        best = d;
        arg = static_cast<int>(c);
      }
    }
    dist[t] = best;
    if (labels) (*labels)[t] = arg;
  }
  return dist;
}

}  // namespace

PcaResult pca_features(const RowMatrix& features, int K) {
  check_population(features, K);
  const double count = static_cast<double>(features.rows());
  Matrix moment = (features.transpose() * features) / count;
  moment = (0.5 * (moment + moment.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(moment);
  if (eig.info() != Eigen::Success) throw NumericalFailure("second-moment eigendecomposition failed");

  const Eigen::Index d = moment.rows();
  PcaResult r;
  r.components.resize(K, d);
  r.eigenvalues.resize(K);
  const Vector& values = eig.eigenvalues();
  const double top = std::max(values[d - 1], 0.0);
  r.rank = static_cast<int>((values.array() > top * 1e-12 * static_cast<double>(d)).count());
  if (top == 0.0) r.rank = 0;
  if (K > r.rank) {
    r.warnings.push_back("K = " + std::to_string(K) + " exceeds the numerical rank " + std::to_string(r.rank) +
                         "; trailing components span the null space");
  }
  for (int k = 0; k < K; ++k) {
    Vector v = eig.eigenvectors().col(d - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    r.components.row(k) = v.transpose();
    r.eigenvalues[k] = std::max(values[d - 1 - k], 0.0);
  }
  return r;
}

double pca_objective(const RowMatrix& features, const RowMatrix& frame) {
  if (frame.cols() != features.cols()) throw InvalidArgument("frame dimension does not match features");
  if (features.rows() == 0) return 0.0;
  const RowMatrix proj = features * frame.transpose();
  const RowMatrix residual = features - proj * frame;
  return residual.squaredNorm() / static_cast<double>(features.rows());
}

RowMatrix KmeansResult::one_hot() const {
  RowMatrix m = RowMatrix::Zero(static_cast<Eigen::Index>(assignments.size()), centroids.rows());
  for (std::size_t t = 0; t < assignments.size(); ++t) m(static_cast<Eigen::Index>(t), assignments[t]) = 1.0;
  return m;
}

KmeansResult kmeans_features(const RowMatrix& features, int K, std::uint64_t seed, int max_iter) {
  check_population(features, K);
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  KmeansResult r;
  r.centroids.resize(K, d);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  r.centroids.row(0) = features.row(pick(rng));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) dist[t] = (features.row(t) - r.centroids.row(0)).squaredNorm();
  for (int c = 1; c < K; ++c) {
    double total = 0.0;
    for (double v : dist) total += v;
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::discrete_distribution<Eigen::Index> weighted(dist.begin(), dist.end());
      chosen = weighted(rng);
    } else {
      chosen = pick(rng);
    }
    r.centroids.row(c) = features.row(chosen);
    for (Eigen::Index t = 0; t < n; ++t)
      dist[t] = std::min(dist[t], (features.row(t) - r.centroids.row(c)).squaredNorm());
  }

  r.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int iter = 0; iter < max_iter; ++iter) {
    dist = nearest(features, r.centroids, &labels);
    double inertia = 0.0;
    for (double v : dist) inertia += v;
    r.inertia_history.push_back(inertia);
    r.inertia = inertia;
    r.iterations = iter + 1;
    const bool stable = labels == r.assignments;
    r.assignments = labels;
    if (stable) {
      r.converged = true;
      break;
    }
    if (iter + 1 == max_iter) break;

    RowMatrix sums = RowMatrix::Zero(K, d);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
    for (Eigen::Index t = 0; t < n; ++t) {
      sums.row(labels[t]) += features.row(t);
      ++counts[labels[t]];
    }
    for (int c = 0; c < K; ++c) {
      if (counts[c] > 0) {
        r.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      Eigen::Index far = 0;
      for (Eigen::Index t = 1; t < n; ++t)
        if (dist[t] > dist[far]) far = t;
      r.centroids.row(c) = features.row(far);
      dist[far] = 0.0;
      r.warnings.push_back("iteration " + std::to_string(iter) + ": empty cluster " + std::to_string(c) +
                           " re-seeded at sample " + std::to_string(far));
    }
  }
  return r;
}

}  // namespace motionsm
