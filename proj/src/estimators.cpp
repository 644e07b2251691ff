#include "mtsysid/estimators.hpp"

#include <Eigen/SVD>
#include <limits>
#include <string>

namespace mtsysid {

namespace {

void check_dims(const Matrix& a, const Trajectory& trajectory, const Matrix& b) {
  trajectory.validate();
  const int n = trajectory.state_dim();
  const int p = trajectory.input_dim();
  if (a.rows() != n || a.cols() != n)
    throw InputError("A must be " + std::to_string(n) + "x" + std::to_string(n));
  if (b.rows() != n || b.cols() != p)
    throw InputError("B must be " + std::to_string(n) + "x" + std::to_string(p));
}

RegressionBlock to_block(const Trajectory& trajectory, const Matrix& b) {
  const int steps = trajectory.length();
  RegressionBlock blk;
  blk.x = trajectory.states.leftCols(steps);
  blk.y = trajectory.states.rightCols(steps);
  if (b.cols() > 0) blk.y -= b * trajectory.inputs;
  return blk;
}

}  // namespace

double ls_loss(const Matrix& a_matrix, const Trajectory& trajectory, const Matrix& b_matrix) {
  check_dims(a_matrix, trajectory, b_matrix);
  const RegressionBlock blk = to_block(trajectory, b_matrix);
  return (blk.y - a_matrix * blk.x).squaredNorm();
}

Matrix ls_gradient(const Matrix& a_matrix, const Trajectory& trajectory, const Matrix& b_matrix) {
  check_dims(a_matrix, trajectory, b_matrix);
  const RegressionBlock blk = to_block(trajectory, b_matrix);
  return -2.0 * (blk.y - a_matrix * blk.x) * blk.x.transpose();
}

double compiled_loss(const Matrix& a, const CompiledSystem& sys) {
  double loss = 0.0;
  for (const auto& blk : sys.blocks) loss += (blk.y - a * blk.x).squaredNorm();
  return loss;
}

Matrix compiled_gradient(const Matrix& a, const CompiledSystem& sys) {
  Matrix g = Matrix::Zero(a.rows(), a.cols());
  for (const auto& blk : sys.blocks) g.noalias() -= 2.0 * (blk.y - a * blk.x) * blk.x.transpose();
  return g;
}

CompiledDataset compile(const MultiSystemDataset& dataset) {
  dataset.validate();
  CompiledDataset out;
  out.state_dim = dataset.state_dim();
  out.systems.reserve(dataset.entries.size());
  for (const auto& e : dataset.entries) {
    CompiledSystem sys;
    sys.blocks.push_back(to_block(e.trajectory, e.b));
    sys.transitions = e.trajectory.length();
    out.systems.push_back(std::move(sys));
  }
  return out;
}

LsEstimate compiled_ls_estimate(const CompiledSystem& sys, int state_dim) {
  const int n = state_dim;
  int total = 0;
  for (const auto& blk : sys.blocks) total += static_cast<int>(blk.x.cols());
  Matrix x(n, total);
  Matrix y(n, total);
  int at = 0;
  for (const auto& blk : sys.blocks) {
    const int w = static_cast<int>(blk.x.cols());
    x.middleCols(at, w) = blk.x;
    y.middleCols(at, w) = blk.y;
    at += w;
  }

  // Rank decision on the Gram matrix X X^T, per the standard SVD cutoff.
  const Matrix gram = x * x.transpose();
  Eigen::JacobiSVD<Matrix> gram_svd(gram);
  const Vector gs = gram_svd.singularValues();
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = gs.size() > 0 ? gs(0) * n * eps : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < gs.size(); ++i)
    if (gs(i) > tol) ++rank;

  LsEstimate est;
  est.rank = rank;
  est.ill_conditioned = rank < n;
  est.rank_tolerance = tol;
  est.gram_condition = (rank > 0) ? gs(0) / gs(rank - 1)
                                  : std::numeric_limits<double>::infinity();

  // Minimum-norm solution A = Y X^+, truncating the SVD of X at the same
  // numerical rank the Gram decision produced.
  if (rank == 0) {
    est.a = Matrix::Zero(n, n);
    return est;
  }
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  Matrix pinv_scaled = svd.matrixV().leftCols(rank);
  for (int i = 0; i < rank; ++i) pinv_scaled.col(i) /= s(i);
  est.a = y * pinv_scaled * svd.matrixU().leftCols(rank).transpose();
  return est;
}

LsEstimate ls_estimate(const Trajectory& trajectory, const Matrix& b_matrix) {
  trajectory.validate();
  const int n = trajectory.state_dim();
  if (b_matrix.rows() != n || b_matrix.cols() != trajectory.input_dim())
    throw InputError("ls_estimate: B matrix shape mismatch");
  CompiledSystem sys;
  sys.blocks.push_back(to_block(trajectory, b_matrix));
  sys.transitions = trajectory.length();
  return compiled_ls_estimate(sys, n);
}

VectorizedLs vectorize(const Trajectory& trajectory, const Matrix& b_matrix) {
  trajectory.validate();
  const int n = trajectory.state_dim();
  if (b_matrix.rows() != n || b_matrix.cols() != trajectory.input_dim())
    throw InputError("vectorize: B matrix shape mismatch");
  const RegressionBlock blk = to_block(trajectory, b_matrix);
  const int steps = static_cast<int>(blk.x.cols());

  VectorizedLs v;
  v.y_tilde = Eigen::Map<const Vector>(blk.y.data(), static_cast<Eigen::Index>(n) * steps);
  // x_tilde = X^T kron I_n: block (t, j) is x_j(t) * I_n.
  v.x_tilde = Matrix::Zero(static_cast<Eigen::Index>(n) * steps,
                           static_cast<Eigen::Index>(n) * n);
  for (int t = 0; t < steps; ++t)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r)
        v.x_tilde(static_cast<Eigen::Index>(t) * n + r,
                  static_cast<Eigen::Index>(j) * n + r) = blk.x(j, t);
  return v;
}

}  // namespace mtsysid
