#include "mtsysid/prox.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace mtsysid {

GroupVector group_soft_threshold(const GroupVector& z, double threshold) {
  if (threshold < 0.0) throw InputError("group_soft_threshold: threshold must be nonnegative");
  const double norm = z.norm();
  if (norm <= threshold) return GroupVector::Zero(z.size());
  return z * ((norm - threshold) / norm);
}

MatrixBundle prox_group_sparsity(const MatrixBundle& bundle, double threshold) {
  if (threshold < 0.0) throw InputError("prox_group_sparsity: threshold must be nonnegative");
  bundle.validate();
  const int n = bundle.dim();

  Eigen::ArrayXXd norm_sq = Eigen::ArrayXXd::Zero(n, n);
  for (const auto& m : bundle.matrices) norm_sq += m.array().square();
  const Eigen::ArrayXXd norms = norm_sq.sqrt();

  // factor_jk = max(||z_jk|| - t, 0) / ||z_jk||, with 0 where the norm is
  // at or below the threshold (covers the 0/0 convention).
  Eigen::ArrayXXd factor(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      factor(j, k) = norms(j, k) > threshold ? (norms(j, k) - threshold) / norms(j, k) : 0.0;

  MatrixBundle out;
  out.matrices.reserve(bundle.matrices.size());
  for (const auto& m : bundle.matrices) out.matrices.push_back((m.array() * factor).matrix());
  return out;
}

MatrixBundle prox_small_heterogeneity(const MatrixBundle& bundle, double weight) {
  if (weight < 0.0) throw InputError("prox_small_heterogeneity: weight must be nonnegative");
  bundle.validate();
  const int count = bundle.count();
  Matrix sums = Matrix::Zero(bundle.dim(), bundle.dim());
  for (const auto& m : bundle.matrices) sums += m;

  const double denom = 2.0 * weight * count + 1.0;
  MatrixBundle out;
  out.matrices.reserve(bundle.matrices.size());
  for (const auto& m : bundle.matrices) out.matrices.push_back((m + 2.0 * weight * sums) / denom);
  return out;
}

MatrixBundle prox_nuclear(const MatrixBundle& bundle, double threshold) {
  if (threshold < 0.0) throw InputError("prox_nuclear: threshold must be nonnegative");
  bundle.validate();
  const Matrix stacked = bundle.stacked();
  Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i) - threshold, 0.0);
  const Matrix shrunk = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return MatrixBundle::from_stacked(shrunk, bundle.dim());
}

double group_l21_norm(const MatrixBundle& bundle) {
  const int n = bundle.dim();
  Eigen::ArrayXXd norm_sq = Eigen::ArrayXXd::Zero(n, n);
  for (const auto& m : bundle.matrices) norm_sq += m.array().square();
  return norm_sq.sqrt().sum();
}

double pairwise_deviation_value(const MatrixBundle& bundle) {
  double value = 0.0;
  const int count = bundle.count();
  for (int i = 0; i < count; ++i)
    for (int j = i + 1; j < count; ++j)
      value += (bundle.matrices[static_cast<std::size_t>(i)] -
                bundle.matrices[static_cast<std::size_t>(j)])
                   .squaredNorm();
  return value;
}

double nuclear_norm_stacked(const MatrixBundle& bundle) {
  return Eigen::BDCSVD<Matrix>(bundle.stacked()).singularValues().sum();
}

double regularizer_value(const MatrixBundle& bundle, const RegularizerSpec& spec) {
  spec.validate();
  bundle.validate();
  switch (spec.kind) {
    case RegularizerKind::GroupSparsity: return group_l21_norm(bundle);
    case RegularizerKind::SmallHeterogeneity: return pairwise_deviation_value(bundle);
    case RegularizerKind::NuclearNorm: return nuclear_norm_stacked(bundle);
    case RegularizerKind::Composite:
      return spec.lambda1 * pairwise_deviation_value(bundle) +
             spec.lambda2 * group_l21_norm(bundle);
  }
  return 0.0;
}

double weighted_regularizer_value(const MatrixBundle& bundle, const RegularizerSpec& spec) {
  if (spec.kind == RegularizerKind::Composite) return regularizer_value(bundle, spec);
  return spec.lambda * regularizer_value(bundle, spec);
}

}  // namespace mtsysid
