#include "mtsysid/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "mtsysid/rng.hpp"

namespace mtsysid {

double spectral_radius(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Trajectory simulate(const LtiSystem& system, const Vector& x0,
                    const Matrix& inputs, std::uint64_t seed) {
  system.validate();
  const int n = system.state_dim();
  const int p = system.input_dim();
  if (x0.size() != n) throw InputError("simulate: x0 dimension does not match the system");
  if (inputs.rows() != p)
    throw InputError("simulate: input rows (" + std::to_string(inputs.rows()) +
                     ") do not match the system input dimension (" + std::to_string(p) + ")");
  if (inputs.cols() < 1) throw InputError("simulate: needs at least one input column");

  const int steps = static_cast<int>(inputs.cols());
  Trajectory traj;
  traj.states.resize(n, steps + 1);
  traj.inputs = inputs;
  traj.states.col(0) = x0;

  Rng rng(seed);
  Vector noise(n);
  for (int t = 0; t < steps; ++t) {
    for (int j = 0; j < n; ++j) noise(j) = system.noise_std * rng.gaussian();
    traj.states.col(t + 1) = system.a * traj.states.col(t) + system.b * inputs.col(t) + noise;
  }
  return traj;
}

namespace {

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < rows; ++j)
    for (int k = 0; k < cols; ++k) m(j, k) = rng.gaussian();
  return m;
}

// Rescales to exactly the cap unless the matrix is (numerically) nilpotent,
// in which case its radius is already below any positive cap.
void rescale_to_radius(Matrix& a, double cap) {
  const double rho = spectral_radius(a);
  if (rho > 1e-12) a *= cap / rho;
}

FamilyResult make_common_sparsity(const SimilarFamilySpec& spec, Rng& rng) {
  const int n = spec.state_dim;
  SupportSet support;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (rng.uniform() < spec.density) support.insert(j, k);
  if (support.size() == 0)
    throw InputError("generate_family: density produced an empty support");

  FamilyResult result;
  for (int i = 0; i < spec.num_systems; ++i) {
    Matrix a = Matrix::Zero(n, n);
    for (const auto& [j, k] : support.entries) a(j, k) = rng.gaussian();
    rescale_to_radius(a, spec.spectral_radius_cap);
    result.systems.push_back({std::move(a), Matrix(), 0.0});
  }
  result.support = std::move(support);
  return result;
}

FamilyResult make_small_heterogeneity(const SimilarFamilySpec& spec, Rng& rng) {
  const int n = spec.state_dim;
  const int count = spec.num_systems;
  const Matrix base = gaussian_matrix(rng, n, n);

  std::vector<Matrix> deltas;
  deltas.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) deltas.push_back(gaussian_matrix(rng, n, n));

  double worst = 0.0;
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j)
      worst = std::max(worst, (deltas[i] - deltas[j]).norm());
  const double scale = (worst > 0.0) ? spec.epsilon / worst : 0.0;

  FamilyResult result;
  double max_rho = 0.0;
  for (int i = 0; i < count; ++i) {
    Matrix a = base + scale * deltas[static_cast<std::size_t>(i)];
    max_rho = std::max(max_rho, spectral_radius(a));
    result.systems.push_back({std::move(a), Matrix(), 0.0});
  }
  // Pairwise distances must survive stabilization, so the rescale is common
  // to the whole family; it only ever shrinks the distances.
  if (max_rho > spec.spectral_radius_cap) {
    const double c = spec.spectral_radius_cap / max_rho;
    for (auto& s : result.systems) s.a *= c;
  }
  return result;
}

FamilyResult make_linear_combination(const SimilarFamilySpec& spec, Rng& rng) {
  const int n = spec.state_dim;
  const int q = spec.basis_rank;
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(q));
  for (int r = 0; r < q; ++r) basis.push_back(gaussian_matrix(rng, n, n));
  Matrix coefficients = gaussian_matrix(rng, spec.num_systems, q);

  FamilyResult result;
  for (int i = 0; i < spec.num_systems; ++i) {
    Matrix a = Matrix::Zero(n, n);
    for (int r = 0; r < q; ++r) a += coefficients(i, r) * basis[static_cast<std::size_t>(r)];
    const double rho = spectral_radius(a);
    if (rho > 1e-12) {
      const double c = spec.spectral_radius_cap / rho;
      a *= c;
      coefficients.row(i) *= c;
    }
    result.systems.push_back({std::move(a), Matrix(), 0.0});
  }
  result.mixing = std::move(coefficients);
  return result;
}

}  // namespace

FamilyResult generate_family(const SimilarFamilySpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  FamilyResult result;
  switch (spec.kind) {
    case FamilyKind::CommonSparsity:
      result = make_common_sparsity(spec, rng);
      break;
    case FamilyKind::SmallHeterogeneity:
      result = make_small_heterogeneity(spec, rng);
      break;
    case FamilyKind::LinearCombination:
      result = make_linear_combination(spec, rng);
      break;
  }
  for (auto& s : result.systems) s.b = gaussian_matrix(rng, spec.state_dim, spec.input_dim);
  return result;
}

}  // namespace mtsysid
