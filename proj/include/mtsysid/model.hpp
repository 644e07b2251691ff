#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mtsysid/types.hpp"

namespace mtsysid {

/// Rolls the recursion x(t+1) = A x(t) + B u(t) + w(t) forward over the given
/// inputs. Noise is i.i.d. N(0, noise_std^2) per coordinate, drawn from `seed`
/// in time-major, coordinate-minor order (n gaussians per step), so equal
/// seeds give bit-identical trajectories.
Trajectory simulate(const LtiSystem& system, const Vector& x0,
                    const Matrix& inputs, std::uint64_t seed);

struct FamilyResult {
  std::vector<LtiSystem> systems;
  std::optional<SupportSet> support;  // common-sparsity: the shared mask
  std::optional<Matrix> mixing;       // linear-combination: N x q coefficients
};

/// Draws a family of N structurally similar systems per `spec`:
///   - common-sparsity: one Bernoulli(density) mask shared by all matrices,
///     nonzeros i.i.d. standard normal, each matrix rescaled to the spectral
///     radius cap;
///   - small-heterogeneity: one dense base matrix plus per-system Gaussian
///     perturbations scaled so the worst pairwise Frobenius distance equals
///     epsilon (a common stability rescale may shrink all distances below
///     the budget when the cap binds);
///   - linear-combination: q dense basis matrices combined with an N x q
///     Gaussian coefficient matrix, each combination rescaled for stability
///     (the returned coefficients absorb the rescaling).
/// B matrices are i.i.d. standard normal; noise_std is left at zero for the
/// caller to set.
FamilyResult generate_family(const SimilarFamilySpec& spec);

/// Largest eigenvalue magnitude of a square matrix.
double spectral_radius(const Matrix& a);

}  // namespace mtsysid
