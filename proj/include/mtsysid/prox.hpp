#pragma once

#include "mtsysid/types.hpp"

namespace mtsysid {

enum class RegularizerKind { GroupSparsity, SmallHeterogeneity, NuclearNorm, Composite };

/// Which similarity prior is active and its weight(s). The composite kind
/// combines the deviation penalty (weight lambda1) with the group penalty
/// (weight lambda2); the other kinds use the single weight lambda.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::GroupSparsity;
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const {
    if (lambda < 0.0 || lambda1 < 0.0 || lambda2 < 0.0)
      throw InputError("RegularizerSpec: weights must be nonnegative");
  }

  static RegularizerSpec group(double lambda) {
    return {RegularizerKind::GroupSparsity, lambda, 0.0, 0.0};
  }
  static RegularizerSpec deviation(double lambda) {
    return {RegularizerKind::SmallHeterogeneity, lambda, 0.0, 0.0};
  }
  static RegularizerSpec nuclear(double lambda) {
    return {RegularizerKind::NuclearNorm, lambda, 0.0, 0.0};
  }
  static RegularizerSpec composite(double lambda1, double lambda2) {
    return {RegularizerKind::Composite, 0.0, lambda1, lambda2};
  }
};

/// Cross-system vector of one fixed entry position (j, k).
using GroupVector = Vector;

/// Shrinks z toward zero by the group soft-threshold
///   y = z / ||z|| * max(||z|| - threshold, 0),
/// with y = 0 whenever ||z|| <= threshold (the 0/0 at z = 0 resolves to 0).
GroupVector group_soft_threshold(const GroupVector& z, double threshold);

/// Applies the group soft-threshold independently to each of the n^2
/// cross-system entry groups of the bundle.
MatrixBundle prox_group_sparsity(const MatrixBundle& bundle, double threshold);

/// Closed-form prox of the pairwise squared-Frobenius deviation penalty:
/// per entry position, y = (z + 2 w s [1,...,1]) / (2 w N + 1) where s is the
/// cross-system entry sum. Entry-group sums are preserved exactly.
MatrixBundle prox_small_heterogeneity(const MatrixBundle& bundle, double weight);

/// Singular value thresholding of the stacked n^2 x N matrix
/// [vec(A_1), ..., vec(A_N)].
MatrixBundle prox_nuclear(const MatrixBundle& bundle, double threshold);

/// The regularizer value R without its tuning weight:
///   group-sparsity     -> sum over positions of cross-system l2 norms
///   small-heterogeneity-> sum over pairs i < j of ||A_i - A_j||_F^2
///   nuclear-norm       -> nuclear norm of the stacked matrix
/// For the composite kind the returned value is already weighted,
/// lambda1 * deviation + lambda2 * group, since there is no single lambda to
/// factor out; objective() adds it without re-weighting.
double regularizer_value(const MatrixBundle& bundle, const RegularizerSpec& spec);

/// lambda * R for the simple kinds, lambda1 * deviation + lambda2 * group for
/// the composite kind; the term the solver's objective trace reports.
double weighted_regularizer_value(const MatrixBundle& bundle, const RegularizerSpec& spec);

/// Building blocks, exposed for the diagnostics module and tests.
double group_l21_norm(const MatrixBundle& bundle);              // sum_jk ||z_jk||_2
double pairwise_deviation_value(const MatrixBundle& bundle);    // sum_{i<j} ||A_i-A_j||_F^2
double nuclear_norm_stacked(const MatrixBundle& bundle);

}  // namespace mtsysid
