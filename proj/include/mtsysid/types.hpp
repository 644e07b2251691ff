#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mtsysid/errors.hpp"

namespace mtsysid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One discrete-time LTI system x(t+1) = A x(t) + B u(t) + w(t), with
/// process noise w ~ N(0, noise_std^2 I).
struct LtiSystem {
  Matrix a;           // n x n state coupling
  Matrix b;           // n x p input coupling
  double noise_std = 0.0;

  int state_dim() const { return static_cast<int>(a.rows()); }
  int input_dim() const { return static_cast<int>(b.cols()); }

  void validate() const {
    if (a.rows() != a.cols()) throw InputError("LtiSystem: A must be square");
    if (b.rows() != a.rows()) throw InputError("LtiSystem: B row count must equal state dimension");
    if (noise_std < 0.0) throw InputError("LtiSystem: noise_std must be nonnegative");
  }
};

/// A recorded trajectory. Column t of `states` is x(t+1) in 1-based time,
/// so states has P+1 columns and inputs has P columns; transitions are
/// x(:, t+1) ~ A x(:, t) + B u(:, t).
struct Trajectory {
  Matrix states;  // n x (P+1)
  Matrix inputs;  // p x P

  int state_dim() const { return static_cast<int>(states.rows()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  int length() const { return static_cast<int>(inputs.cols()); }  // P

  void validate() const {
    if (states.cols() != inputs.cols() + 1)
      throw InputError("Trajectory: states must hold exactly one more column than inputs");
    if (states.cols() < 2) throw InputError("Trajectory: needs at least one transition");
  }
};

/// The N trajectories plus the known input matrices; the solver's input.
struct DatasetEntry {
  Trajectory trajectory;
  Matrix b;  // n x p, known
};

struct MultiSystemDataset {
  std::vector<DatasetEntry> entries;

  int num_systems() const { return static_cast<int>(entries.size()); }
  int state_dim() const { return entries.empty() ? 0 : entries.front().trajectory.state_dim(); }
  int input_dim() const { return entries.empty() ? 0 : entries.front().trajectory.input_dim(); }

  void validate() const {
    if (entries.empty()) throw InputError("MultiSystemDataset: needs at least one system");
    const int n = state_dim();
    const int p = input_dim();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& e = entries[i];
      e.trajectory.validate();
      if (e.trajectory.state_dim() != n || e.trajectory.input_dim() != p)
        throw InputError("MultiSystemDataset: entry " + std::to_string(i + 1) +
                         " has inconsistent state/input dimension");
      if (e.b.rows() != n || e.b.cols() != p)
        throw InputError("MultiSystemDataset: entry " + std::to_string(i + 1) +
                         " has a B matrix of the wrong shape");
    }
  }

  /// True when all per-system trajectory lengths agree (the setting of the
  /// error-bound diagnostics).
  bool uniform_length() const {
    for (const auto& e : entries)
      if (e.trajectory.length() != entries.front().trajectory.length()) return false;
    return true;
  }
};

/// Ordered collection of N candidate or estimated n x n matrices; the
/// solver's iterate and output.
struct MatrixBundle {
  std::vector<Matrix> matrices;

  MatrixBundle() = default;
  explicit MatrixBundle(std::vector<Matrix> m) : matrices(std::move(m)) {}

  static MatrixBundle zero(int count, int n) {
    MatrixBundle b;
    b.matrices.assign(static_cast<std::size_t>(count), Matrix::Zero(n, n));
    return b;
  }

  int count() const { return static_cast<int>(matrices.size()); }
  int dim() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }

  void validate() const {
    for (const auto& m : matrices) {
      if (m.rows() != m.cols()) throw InputError("MatrixBundle: matrices must be square");
      if (m.rows() != matrices.front().rows())
        throw InputError("MatrixBundle: matrices must share one dimension");
    }
  }

  /// Stacks the bundle as the n^2 x N matrix [vec(A_1), ..., vec(A_N)].
  Matrix stacked() const {
    const int n = dim();
    Matrix s(n * n, count());
    for (int i = 0; i < count(); ++i)
      s.col(i) = Eigen::Map<const Vector>(matrices[static_cast<std::size_t>(i)].data(), n * n);
    return s;
  }

  /// Inverse of stacked(): reads columns back as n x n matrices.
  static MatrixBundle from_stacked(const Matrix& s, int n) {
    if (s.rows() != static_cast<Eigen::Index>(n) * n)
      throw InputError("MatrixBundle: stacked matrix has wrong row count");
    MatrixBundle b;
    b.matrices.reserve(static_cast<std::size_t>(s.cols()));
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
      Vector col = s.col(i);
      b.matrices.push_back(Eigen::Map<const Matrix>(col.data(), n, n));
    }
    return b;
  }

  double frobenius_norm() const {
    double sq = 0.0;
    for (const auto& m : matrices) sq += m.squaredNorm();
    return std::sqrt(sq);
  }

  double frobenius_distance(const MatrixBundle& other) const {
    double sq = 0.0;
    for (int i = 0; i < count(); ++i)
      sq += (matrices[static_cast<std::size_t>(i)] - other.matrices[static_cast<std::size_t>(i)])
                .squaredNorm();
    return std::sqrt(sq);
  }
};

/// Index set of entry positions (j, k) within [n] x [n]; used for supports
/// of cross-system groups. Indices are 0-based internally.
struct SupportSet {
  std::set<std::pair<int, int>> entries;

  int size() const { return static_cast<int>(entries.size()); }
  bool contains(int j, int k) const { return entries.count({j, k}) > 0; }
  void insert(int j, int k) { entries.insert({j, k}); }

  /// Positions whose cross-system group is nonzero (strictly, beyond `tol`).
  static SupportSet from_bundle(const MatrixBundle& bundle, double tol = 0.0) {
    SupportSet s;
    const int n = bundle.dim();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        for (const auto& m : bundle.matrices)
          if (std::abs(m(j, k)) > tol) {
            s.insert(j, k);
            break;
          }
      }
    return s;
  }
};

enum class FamilyKind { CommonSparsity, SmallHeterogeneity, LinearCombination };

/// Recipe for drawing a family of N structurally similar systems.
/// Only the fields relevant to `kind` are read.
struct SimilarFamilySpec {
  FamilyKind kind = FamilyKind::CommonSparsity;
  int state_dim = 0;    // n
  int input_dim = 0;    // p
  int num_systems = 0;  // N
  double density = 0.5;             // common-sparsity: fraction of nonzero entries
  double epsilon = 0.0;             // small-heterogeneity: pairwise Frobenius budget
  int basis_rank = 1;               // linear-combination: q
  double spectral_radius_cap = 0.95;
  std::uint64_t seed = 0;

  void validate() const {
    if (state_dim <= 0 || num_systems <= 0)
      throw InputError("SimilarFamilySpec: n and N must be positive");
    if (input_dim < 0) throw InputError("SimilarFamilySpec: p must be nonnegative");
    if (!(spectral_radius_cap > 0.0 && spectral_radius_cap < 1.0))
      throw InputError("SimilarFamilySpec: spectral_radius_cap must lie in (0, 1)");
    switch (kind) {
      case FamilyKind::CommonSparsity:
        if (!(density > 0.0 && density <= 1.0))
          throw InputError("SimilarFamilySpec: density must lie in (0, 1]");
        break;
      case FamilyKind::SmallHeterogeneity:
        if (epsilon < 0.0) throw InputError("SimilarFamilySpec: epsilon must be nonnegative");
        break;
      case FamilyKind::LinearCombination:
        if (basis_rank <= 0) throw InputError("SimilarFamilySpec: basis_rank must be positive");
        if (basis_rank > num_systems)
          throw InputError("SimilarFamilySpec: basis_rank must not exceed the number of systems");
        break;
    }
  }
};

}  // namespace mtsysid
