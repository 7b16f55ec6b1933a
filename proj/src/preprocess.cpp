#include "motionsm/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace motionsm {

WhiteningTransform WhiteningTransform::identity(int n) {
  WhiteningTransform t;
  t.mean = Vector::Zero(n);
  t.matrix = Matrix::Identity(n, n);
  return t;
}

WhiteningTransform fit_zca(const RowMatrix& frames, double epsilon, EpsilonScale scale) {
  if (frames.rows() < 2) throw InsufficientData("ZCA fit needs at least 2 frames");
  if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be >= 0");
  if (!frames.allFinite()) throw NumericalFailure("non-finite frame in ZCA fitting set");

  const double count = static_cast<double>(frames.rows());
  WhiteningTransform t;
  t.mean = frames.colwise().sum().transpose() / count;
  const RowMatrix centred = frames.rowwise() - t.mean.transpose();
  Matrix cov = (centred.transpose() * centred) / count;
  cov = (0.5 * (cov + cov.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalFailure("covariance eigendecomposition failed");
  Vector d = eig.eigenvalues().cwiseMax(0.0);
  t.epsilon = scale == EpsilonScale::RelativeToLargest ? epsilon * d.maxCoeff() : epsilon;

  Vector inv_sqrt(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double v = d[i] + t.epsilon;
    inv_sqrt[i] = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
  }
  const Matrix& e = eig.eigenvectors();
  t.matrix = e * inv_sqrt.asDiagonal() * e.transpose();
  t.matrix = (0.5 * (t.matrix + t.matrix.transpose())).eval();
  t.fit_hash = fnv1a64(frames.data(), sizeof(double) * frames.size());
  return t;
}

Frame apply(const WhiteningTransform& transform, const Frame& frame) {
  if (frame.size() != transform.mean.size()) {
    throw InvalidArgument("frame length " + std::to_string(frame.size()) + " does not match whitening size " +
                          std::to_string(transform.mean.size()));
  }
  return transform.matrix * (frame - transform.mean);
}

RowMatrix apply_rows(const WhiteningTransform& transform, const RowMatrix& frames) {
  if (frames.cols() != transform.mean.size()) throw InvalidArgument("frame length does not match whitening size");
  RowMatrix out = (frames.rowwise() - transform.mean.transpose()) * transform.matrix.transpose();
  return out;
}

}  // namespace motionsm
