#include "mtsysid/analysis.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtsysid/rng.hpp"

namespace mtsysid {

double prediction_error_score(const Matrix& a_matrix, const Matrix& predictors,
                              const Matrix& targets) {
  const int n = static_cast<int>(targets.rows());
  const int pairs = static_cast<int>(targets.cols());
  if (n < 1) throw InputError("prediction_error_score: empty test targets");
  if (pairs < 2) throw InputError("prediction_error_score: needs at least two test pairs");
  if (predictors.rows() != n || predictors.cols() != pairs)
    throw InputError("prediction_error_score: predictor/target shape mismatch");
  if (a_matrix.rows() != n || a_matrix.cols() != n)
    throw InputError("prediction_error_score: A shape mismatch");

  const Matrix predicted = a_matrix * predictors;
  const Vector mean = targets.rowwise().mean();

  std::string degenerate;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double denom = (targets.row(k).array() - mean(k)).square().sum();
    if (denom <= 0.0) {
      degenerate += (degenerate.empty() ? "" : ", ") + std::to_string(k + 1);
      continue;
    }
    const double num = (targets.row(k) - predicted.row(k)).squaredNorm();
    total += num / denom;
  }
  if (!degenerate.empty())
    throw InputError("prediction_error_score: zero variance in target coordinate(s) " +
                     degenerate);
  return total / n;
}

std::vector<double> frobenius_errors(const MatrixBundle& estimate, const MatrixBundle& truth) {
  if (estimate.count() != truth.count() || estimate.dim() != truth.dim())
    throw InputError("frobenius_errors: bundle shapes differ");
  std::vector<double> errors;
  errors.reserve(estimate.matrices.size());
  for (int i = 0; i < estimate.count(); ++i)
    errors.push_back((estimate.matrices[static_cast<std::size_t>(i)] -
                      truth.matrices[static_cast<std::size_t>(i)])
                         .norm());
  return errors;
}

namespace {

int uniform_length_or_throw(const MultiSystemDataset& dataset, const char* who) {
  if (!dataset.uniform_length())
    throw UnsupportedSettingError(std::string(who) +
                                  ": stated for uniform trajectory lengths only");
  return dataset.entries.front().trajectory.length();
}

}  // namespace

double noise_envelope_m(const MultiSystemDataset& dataset, double sigma) {
  dataset.validate();
  double max_energy = 0.0;
  for (const auto& e : dataset.entries) {
    const int steps = e.trajectory.length();
    const Matrix regressors = e.trajectory.states.leftCols(steps);
    max_energy = std::max(max_energy, regressors.rowwise().squaredNorm().maxCoeff());
  }
  return sigma * sigma * max_energy;
}

double lambda0_value(const MultiSystemDataset& dataset, double sigma, double gamma) {
  dataset.validate();
  if (sigma <= 0.0 || gamma <= 0.0)
    throw InputError("lambda0_value: sigma and gamma must be positive");
  const int steps = uniform_length_or_throw(dataset, "lambda0_value");
  const int n = dataset.state_dim();
  const int count = dataset.num_systems();

  const double m = noise_envelope_m(dataset, sigma);
  const double v = (4.0 * gamma + 8.0 * std::log(static_cast<double>(n))) / count;
  return 2.0 * std::sqrt(m) / (static_cast<double>(n) * steps) *
         std::sqrt(1.0 + std::sqrt(v) + v);
}

double phi_sample_ratio(const CompiledDataset& data, const SupportSet& support,
                        const MatrixBundle& bundle) {
  const int n = data.state_dim;
  MatrixBundle restricted;
  restricted.matrices.reserve(bundle.matrices.size());
  for (const auto& m : bundle.matrices) {
    Matrix r = Matrix::Zero(n, n);
    for (const auto& [j, k] : support.entries) r(j, k) = m(j, k);
    restricted.matrices.push_back(std::move(r));
  }
  const double l21 = group_l21_norm(restricted);
  if (l21 <= 0.0) return std::numeric_limits<double>::quiet_NaN();

  double energy = 0.0;
  for (int i = 0; i < data.num_systems(); ++i)
    for (const auto& blk : data.systems[static_cast<std::size_t>(i)].blocks)
      energy += (bundle.matrices[static_cast<std::size_t>(i)] * blk.x).squaredNorm();

  const int steps = data.systems.front().transitions;
  return support.size() * energy / (static_cast<double>(steps) * l21 * l21);
}

namespace {

double estimate_phi_compiled(const CompiledDataset& data, const SupportSet& support,
                             int num_samples, std::uint64_t seed) {
  if (support.size() == 0) throw InputError("estimate_phi: support must be nonempty");
  if (num_samples <= 0) throw InputError("estimate_phi: num_samples must be positive");
  const int n = data.state_dim;
  const int count = data.num_systems();

  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int s = 0; s < num_samples; ++s) {
    MatrixBundle sample;
    sample.matrices.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      Matrix m(n, n);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) m(j, k) = rng.gaussian();
      sample.matrices.push_back(std::move(m));
    }
    const double cone_fraction = 3.0 * rng.uniform();

    // Split the draw into its S and S^c parts and rescale the complement so
    // the sample sits inside the cone by construction.
    MatrixBundle on_support = MatrixBundle::zero(count, n);
    MatrixBundle off_support = MatrixBundle::zero(count, n);
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (support.contains(j, k))
            on_support.matrices[static_cast<std::size_t>(i)](j, k) =
                sample.matrices[static_cast<std::size_t>(i)](j, k);
          else
            off_support.matrices[static_cast<std::size_t>(i)](j, k) =
                sample.matrices[static_cast<std::size_t>(i)](j, k);
        }
    const double norm_on = group_l21_norm(on_support);
    if (norm_on <= 0.0) continue;  // discarded per the sampling contract
    const double norm_off = group_l21_norm(off_support);
    const double rescale = norm_off > 0.0 ? cone_fraction * norm_on / norm_off : 0.0;
    for (int i = 0; i < count; ++i)
      sample.matrices[static_cast<std::size_t>(i)] =
          on_support.matrices[static_cast<std::size_t>(i)] +
          rescale * off_support.matrices[static_cast<std::size_t>(i)];

    const double ratio = phi_sample_ratio(data, support, sample);
    if (std::isnan(ratio)) continue;
    best = std::min(best, ratio);
    any = true;
  }
  if (!any)
    throw EstimationFailureError("estimate_phi: every sample had a zero S-restricted norm");
  return best;
}

}  // namespace

double estimate_phi(const MultiSystemDataset& dataset, const SupportSet& support,
                    int num_samples, std::uint64_t seed) {
  dataset.validate();
  uniform_length_or_throw(dataset, "estimate_phi");
  return estimate_phi_compiled(compile(dataset), support, num_samples, seed);
}

BoundDiagnostics theorem1_check(const MultiSystemDataset& dataset, const MatrixBundle& truth,
                                const MatrixBundle& estimate, double lambda, double gamma,
                                double sigma, int num_phi_samples, std::uint64_t seed) {
  dataset.validate();
  const int n = dataset.state_dim();
  const int count = dataset.num_systems();
  if (truth.count() != count || truth.dim() != n || estimate.count() != count ||
      estimate.dim() != n)
    throw InputError("theorem1_check: bundle shapes do not match the dataset");
  const int steps = uniform_length_or_throw(dataset, "theorem1_check");

  BoundDiagnostics diag;
  diag.gamma = gamma;
  diag.lambda = lambda;
  diag.noise_m = noise_envelope_m(dataset, sigma);
  diag.lambda0 = lambda0_value(dataset, sigma, gamma);
  diag.lambda_required_min = 4.0 * n * count * steps * diag.lambda0;
  if (lambda < diag.lambda_required_min)
    throw InputError("theorem1_check: lambda " + std::to_string(lambda) +
                     " is below the required minimum 4nNP*lambda0 = " +
                     std::to_string(diag.lambda_required_min));

  const SupportSet star = SupportSet::from_bundle(truth);
  diag.support_size = star.size();

  const CompiledDataset data = compile(dataset);
  double lhs = 0.0;
  for (int i = 0; i < count; ++i) {
    const Matrix diff = truth.matrices[static_cast<std::size_t>(i)] -
                        estimate.matrices[static_cast<std::size_t>(i)];
    for (const auto& blk : data.systems[static_cast<std::size_t>(i)].blocks)
      lhs += (diff * blk.x).squaredNorm();
  }
  diag.lhs = lhs;

  if (star.size() == 0) {
    diag.phi_estimate = 0.0;
    diag.rhs = 0.0;
    diag.rhs_phi_squared = 0.0;
  } else {
    diag.phi_estimate = estimate_phi_compiled(data, star, num_phi_samples, seed);
    const double numer = 24.0 * lambda * lambda * star.size();
    const double denom = static_cast<double>(steps) * count;
    diag.rhs = numer / (denom * diag.phi_estimate);
    diag.rhs_phi_squared = numer / (denom * diag.phi_estimate * diag.phi_estimate);
  }
  diag.holds = diag.lhs <= diag.rhs;
  diag.holds_phi_squared = diag.lhs <= diag.rhs_phi_squared;
  return diag;
}

OracleResult oracle_bundle_micro(const MultiSystemDataset& dataset, const MatrixBundle& truth,
                                 double lambda, int num_phi_samples, std::uint64_t seed) {
  dataset.validate();
  const int n = dataset.state_dim();
  const int count = dataset.num_systems();
  if (n > 3)
    throw ScaleGuardError("oracle_bundle_micro: support enumeration is 2^(n^2); n must be <= 3");
  if (truth.count() != count || truth.dim() != n)
    throw InputError("oracle_bundle_micro: truth shape does not match the dataset");
  if (lambda < 0.0) throw InputError("oracle_bundle_micro: lambda must be nonnegative");
  const int steps = uniform_length_or_throw(dataset, "oracle_bundle_micro");
  const CompiledDataset data = compile(dataset);

  const int positions = n * n;
  const std::uint64_t num_supports = std::uint64_t{1} << positions;

  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();

  for (std::uint64_t mask = 0; mask < num_supports; ++mask) {
    SupportSet support;
    for (int pos = 0; pos < positions; ++pos)
      if (mask & (std::uint64_t{1} << pos)) support.insert(pos / n, pos % n);

    // Support-restricted LS against the truth-generated targets, row by row.
    MatrixBundle candidate = MatrixBundle::zero(count, n);
    double fit = 0.0;
    for (int i = 0; i < count; ++i) {
      const Matrix& regressors = data.systems[static_cast<std::size_t>(i)].blocks.front().x;
      const Matrix& a_true = truth.matrices[static_cast<std::size_t>(i)];
      Matrix& a_fit = candidate.matrices[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) {
        std::vector<int> cols;
        for (int k = 0; k < n; ++k)
          if (support.contains(j, k)) cols.push_back(k);
        const Vector target = regressors.transpose() * a_true.row(j).transpose();
        if (!cols.empty()) {
          Matrix design(regressors.cols(), static_cast<Eigen::Index>(cols.size()));
          for (std::size_t c = 0; c < cols.size(); ++c)
            design.col(static_cast<Eigen::Index>(c)) =
                regressors.row(cols[c]).transpose();
          Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
          const Vector coef = cod.solve(target);
          for (std::size_t c = 0; c < cols.size(); ++c)
            a_fit(j, cols[c]) = coef(static_cast<Eigen::Index>(c));
          fit += (target - design * coef).squaredNorm();
        } else {
          fit += target.squaredNorm();
        }
      }
    }

    double phi_hat = 0.0;
    double penalty = 0.0;
    if (support.size() > 0 && lambda > 0.0) {
      phi_hat = estimate_phi_compiled(data, support,
                                      num_phi_samples, Rng::derive_seed(seed, mask));
      penalty = 4.0 * lambda * lambda * support.size() /
                (static_cast<double>(steps) * count * phi_hat);
    }

    const double objective = fit + penalty;
    if (objective < best.objective) {
      best.bundle = std::move(candidate);
      best.support = std::move(support);
      best.fit_error = fit;
      best.penalty = penalty;
      best.phi_hat = phi_hat;
      best.objective = objective;
    }
  }
  return best;
}

double deviation_lambda_anchor(const CompiledDataset& data) {
  double anchor = 0.0;
  for (const auto& sys : data.systems) {
    Matrix gram = Matrix::Zero(data.state_dim, data.state_dim);
    for (const auto& blk : sys.blocks) gram += blk.x * blk.x.transpose();
    anchor = std::max(anchor, Eigen::BDCSVD<Matrix>(gram).singularValues()(0));
  }
  return anchor / std::max(data.num_systems(), 1);
}

double nuclear_lambda_max(const CompiledDataset& data) {
  const int n = data.state_dim;
  const Matrix zero = Matrix::Zero(n, n);
  Matrix stacked(static_cast<Eigen::Index>(n) * n, data.num_systems());
  for (int i = 0; i < data.num_systems(); ++i) {
    const Matrix g = compiled_gradient(zero, data.systems[static_cast<std::size_t>(i)]);
    stacked.col(i) = Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(n) * n);
  }
  return Eigen::BDCSVD<Matrix>(stacked).singularValues()(0);
}

namespace {

std::vector<double> log_spaced(double lo, double hi, int points) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    grid.push_back(hi);
    return grid;
  }
  const double ratio = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid.push_back(lo * std::exp(ratio * i));
  return grid;
}

RegularizerSpec spec_at(RegularizerKind kind, double value, double anchor1, double anchor2) {
  switch (kind) {
    case RegularizerKind::GroupSparsity: return RegularizerSpec::group(value);
    case RegularizerKind::SmallHeterogeneity: return RegularizerSpec::deviation(value);
    case RegularizerKind::NuclearNorm: return RegularizerSpec::nuclear(value);
    case RegularizerKind::Composite:
      return RegularizerSpec::composite(value * anchor1, value * anchor2);
  }
  return {};
}

}  // namespace

CvResult cross_validate(const MultiSystemDataset& dataset, RegularizerKind kind,
                        const std::optional<std::vector<double>>& lambda_grid, int folds,
                        std::uint64_t seed, const SolverConfig& base_config) {
  (void)seed;  // splits are contiguous in time and the solver is deterministic
  dataset.validate();
  if (folds < 2) throw InputError("cross_validate: folds must be at least 2");
  for (std::size_t i = 0; i < dataset.entries.size(); ++i)
    if (dataset.entries[i].trajectory.length() < 2 * folds)
      throw InputError("cross_validate: trajectory " + std::to_string(i + 1) +
                       " is too short for " + std::to_string(folds) + " folds");

  const CompiledDataset full = compile(dataset);
  const int count = dataset.num_systems();
  const int n = dataset.state_dim();

  double anchor1 = 0.0, anchor2 = 0.0;  // composite: (deviation, group) anchors
  std::vector<double> grid;
  if (lambda_grid.has_value()) {
    grid = *lambda_grid;
    if (grid.empty()) throw InputError("cross_validate: empty lambda grid");
    for (double g : grid)
      if (g < 0.0) throw InputError("cross_validate: negative grid value");
    if (kind == RegularizerKind::Composite) {
      anchor1 = deviation_lambda_anchor(full);
      anchor2 = lambda_max_compiled(full);
    }
  } else {
    switch (kind) {
      case RegularizerKind::GroupSparsity: {
        const double top = lambda_max_compiled(full);
        grid = log_spaced(1e-4 * top, top, 20);
        break;
      }
      case RegularizerKind::SmallHeterogeneity: {
        const double top = deviation_lambda_anchor(full);
        grid = log_spaced(1e-4 * top, top, 20);
        break;
      }
      case RegularizerKind::NuclearNorm: {
        const double top = nuclear_lambda_max(full);
        grid = log_spaced(1e-4 * top, top, 20);
        break;
      }
      case RegularizerKind::Composite: {
        anchor1 = deviation_lambda_anchor(full);
        anchor2 = lambda_max_compiled(full);
        grid = log_spaced(1e-4, 1.0, 20);
        break;
      }
    }
  }
  std::sort(grid.begin(), grid.end());

  // Per-fold training datasets (complement of the held-out block, up to two
  // contiguous segments per system) and held-out transition ranges.
  struct Fold {
    CompiledDataset train;
    std::vector<std::pair<int, int>> heldout;  // per system: [begin, end)
  };
  std::vector<Fold> fold_data;
  for (int f = 0; f < folds; ++f) {
    Fold fold;
    fold.train.state_dim = n;
    for (int i = 0; i < count; ++i) {
      const auto& entry = dataset.entries[static_cast<std::size_t>(i)];
      const int steps = entry.trajectory.length();
      const int begin = f * steps / folds;
      const int end = (f + 1) * steps / folds;
      fold.heldout.emplace_back(begin, end);

      CompiledSystem sys;
      const Matrix& x_full = full.systems[static_cast<std::size_t>(i)].blocks.front().x;
      const Matrix& y_full = full.systems[static_cast<std::size_t>(i)].blocks.front().y;
      if (begin > 0)
        sys.blocks.push_back({x_full.leftCols(begin), y_full.leftCols(begin)});
      if (end < steps)
        sys.blocks.push_back({x_full.middleCols(end, steps - end),
                              y_full.middleCols(end, steps - end)});
      sys.transitions = steps - (end - begin);
      fold.train.systems.push_back(std::move(sys));
    }
    fold_data.push_back(std::move(fold));
  }

  CvResult result;
  result.grid = grid;
  result.scores.assign(grid.size(), 0.0);

  // Warm-start down the path: largest lambda first, reusing the previous
  // solution as the next initialization.
  for (int f = 0; f < folds; ++f) {
    std::optional<MatrixBundle> warm;
    for (int gi = static_cast<int>(grid.size()) - 1; gi >= 0; --gi) {
      SolverConfig config = base_config;
      config.regularizer = spec_at(kind, grid[static_cast<std::size_t>(gi)], anchor1, anchor2);
      const SolveResult fit = solve_compiled(fold_data[static_cast<std::size_t>(f)].train,
                                             config, warm);
      warm = fit.bundle;

      double score = 0.0;
      for (int i = 0; i < count; ++i) {
        const auto [begin, end] = fold_data[static_cast<std::size_t>(f)].heldout
                                      [static_cast<std::size_t>(i)];
        const Matrix& x_full = full.systems[static_cast<std::size_t>(i)].blocks.front().x;
        const Matrix& y_full = full.systems[static_cast<std::size_t>(i)].blocks.front().y;
        score += (y_full.middleCols(begin, end - begin) -
                  fit.bundle.matrices[static_cast<std::size_t>(i)] *
                      x_full.middleCols(begin, end - begin))
                     .squaredNorm();
      }
      result.scores[static_cast<std::size_t>(gi)] += score / folds;
    }
  }

  std::size_t best = 0;
  for (std::size_t gi = 1; gi < grid.size(); ++gi)
    if (result.scores[gi] < result.scores[best]) best = gi;
  result.best_lambda = grid[best];
  result.best_spec = spec_at(kind, grid[best], anchor1, anchor2);
  return result;
}

}  // namespace mtsysid
