#pragma once

#include <vector>

#include "mtsysid/types.hpp"

namespace mtsysid {

/// Per-system LS fit: sum over transitions of ||x(t+1) - A x(t) - B u(t)||^2.
double ls_loss(const Matrix& a_matrix, const Trajectory& trajectory, const Matrix& b_matrix);

/// Matrix gradient of ls_loss with respect to A:
///   grad = -2 * sum_t r(t) x(t)^T  with  r(t) = x(t+1) - A x(t) - B u(t).
Matrix ls_gradient(const Matrix& a_matrix, const Trajectory& trajectory, const Matrix& b_matrix);

struct LsEstimate {
  Matrix a;               // minimum-norm least-squares solution
  int rank = 0;           // numerical rank of the regressor Gram matrix
  bool ill_conditioned = false;  // rank < n
  double gram_condition = 0.0;   // sigma_1 / sigma_rank of the Gram; inf if rank 0
  double rank_tolerance = 0.0;   // cutoff used for the rank decision
};

/// Baseline per-system estimator. Rank deficiency is reported, never raised:
/// the returned matrix is the minimum-norm solution, computed by truncating
/// the regressor SVD at the numerical rank of the Gram matrix (cutoff:
/// largest singular value x max dimension x machine epsilon).
LsEstimate ls_estimate(const Trajectory& trajectory, const Matrix& b_matrix);

/// Vectorized form of the LS fit: loss(A) = ||y_tilde - x_tilde * vec(A)||^2.
/// x_tilde is the nP x n^2 Kronecker regressor; only meant for testing and
/// the compatibility diagnostics, since it is quadratic in n^2 memory.
struct VectorizedLs {
  Vector y_tilde;  // nP
  Matrix x_tilde;  // nP x n^2
};

VectorizedLs vectorize(const Trajectory& trajectory, const Matrix& b_matrix);

// --- Compiled regression form ------------------------------------------
//
// The solver and the cross-validation splitter work against per-system
// regression blocks rather than raw trajectories: a block holds the regressor
// states X = [x(1) .. x(P)] and targets Y = [x(2)-Bu(1) .. x(P+1)-Bu(P)].
// A system may contribute several blocks (e.g. a fold cut out of the middle
// of a trajectory leaves two contiguous segments).

struct RegressionBlock {
  Matrix x;  // n x P_block
  Matrix y;  // n x P_block
};

struct CompiledSystem {
  std::vector<RegressionBlock> blocks;
  int transitions = 0;
};

struct CompiledDataset {
  std::vector<CompiledSystem> systems;
  int state_dim = 0;

  int num_systems() const { return static_cast<int>(systems.size()); }
};

CompiledDataset compile(const MultiSystemDataset& dataset);

double compiled_loss(const Matrix& a, const CompiledSystem& sys);
Matrix compiled_gradient(const Matrix& a, const CompiledSystem& sys);
LsEstimate compiled_ls_estimate(const CompiledSystem& sys, int state_dim);

}  // namespace mtsysid
