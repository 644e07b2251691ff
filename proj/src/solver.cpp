#include "mtsysid/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mtsysid {

namespace {

// Smooth part of the objective. For the composite regularizer the (smooth)
// deviation penalty folds in here so the prox step stays closed form.
double smooth_value(const CompiledDataset& data, const MatrixBundle& bundle,
                    const RegularizerSpec& reg) {
  double value = 0.0;
  for (int i = 0; i < data.num_systems(); ++i)
    value += compiled_loss(bundle.matrices[static_cast<std::size_t>(i)],
                           data.systems[static_cast<std::size_t>(i)]);
  if (reg.kind == RegularizerKind::Composite)
    value += reg.lambda1 * pairwise_deviation_value(bundle);
  return value;
}

std::vector<Matrix> smooth_gradient(const CompiledDataset& data, const MatrixBundle& bundle,
                                    const RegularizerSpec& reg) {
  const int count = data.num_systems();
  std::vector<Matrix> grads;
  grads.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    grads.push_back(compiled_gradient(bundle.matrices[static_cast<std::size_t>(i)],
                                      data.systems[static_cast<std::size_t>(i)]));
  if (reg.kind == RegularizerKind::Composite && reg.lambda1 > 0.0) {
    Matrix sum = Matrix::Zero(bundle.dim(), bundle.dim());
    for (const auto& m : bundle.matrices) sum += m;
    for (int i = 0; i < count; ++i)
      grads[static_cast<std::size_t>(i)] +=
          2.0 * reg.lambda1 *
          (count * bundle.matrices[static_cast<std::size_t>(i)] - sum);
  }
  return grads;
}

// Nonsmooth part handled by the prox: its weighted value and the prox map.
double nonsmooth_value(const MatrixBundle& bundle, const RegularizerSpec& reg) {
  switch (reg.kind) {
    case RegularizerKind::GroupSparsity: return reg.lambda * group_l21_norm(bundle);
    case RegularizerKind::SmallHeterogeneity: return reg.lambda * pairwise_deviation_value(bundle);
    case RegularizerKind::NuclearNorm: return reg.lambda * nuclear_norm_stacked(bundle);
    case RegularizerKind::Composite: return reg.lambda2 * group_l21_norm(bundle);
  }
  return 0.0;
}

MatrixBundle apply_prox(const MatrixBundle& z, double step, const RegularizerSpec& reg) {
  switch (reg.kind) {
    case RegularizerKind::GroupSparsity: return prox_group_sparsity(z, step * reg.lambda);
    case RegularizerKind::SmallHeterogeneity: return prox_small_heterogeneity(z, step * reg.lambda);
    case RegularizerKind::NuclearNorm: return prox_nuclear(z, step * reg.lambda);
    case RegularizerKind::Composite: return prox_group_sparsity(z, step * reg.lambda2);
  }
  return z;
}

}  // namespace

SolveResult solve_compiled(const CompiledDataset& data, const SolverConfig& config,
                           const std::optional<MatrixBundle>& initial) {
  config.validate();
  const int count = data.num_systems();
  const int n = data.state_dim;
  if (count == 0) throw InputError("solve: empty dataset");

  MatrixBundle current = initial.value_or(MatrixBundle::zero(count, n));
  current.validate();
  if (current.count() != count || current.dim() != n)
    throw InputError("solve: initial bundle shape does not match the dataset");

  const RegularizerSpec& reg = config.regularizer;
  SolveResult result;
  SolveReport& report = result.report;

  double f_current = smooth_value(data, current, reg);
  double objective_current = f_current + nonsmooth_value(current, reg);
  report.objective_trace.push_back(objective_current);
  if (!std::isfinite(objective_current))
    throw NumericalError("solve: non-finite objective at initialization");

  double step = config.use_line_search ? config.initial_step : config.fixed_step;

  for (int m = 0; m < config.max_iterations; ++m) {
    const std::vector<Matrix> grads = smooth_gradient(data, current, reg);
    for (const auto& g : grads)
      if (!g.allFinite())
        throw NumericalError("solve: non-finite gradient at iteration " + std::to_string(m));

    MatrixBundle candidate;
    double f_candidate = 0.0;
    int backtracks = 0;
    for (;;) {
      MatrixBundle z;
      z.matrices.reserve(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i)
        z.matrices.push_back(current.matrices[static_cast<std::size_t>(i)] -
                             step * grads[static_cast<std::size_t>(i)]);
      candidate = apply_prox(z, step, reg);
      f_candidate = smooth_value(data, candidate, reg);

      if (!config.use_line_search) break;

      // Sufficient decrease: f(Y) <= f(A) + <grad, Y-A> + ||Y-A||_F^2/(2a).
      double linear = 0.0;
      double quadratic = 0.0;
      for (int i = 0; i < count; ++i) {
        const Matrix diff = candidate.matrices[static_cast<std::size_t>(i)] -
                            current.matrices[static_cast<std::size_t>(i)];
        linear += grads[static_cast<std::size_t>(i)].cwiseProduct(diff).sum();
        quadratic += diff.squaredNorm();
      }
      const double bound = f_current + linear + quadratic / (2.0 * step);
      if (std::isfinite(f_candidate) && f_candidate <= bound + 1e-12 * std::abs(bound)) break;

      step *= config.backtrack_factor;
      if (++backtracks > config.max_backtracks_per_iter)
        throw StepSizeCollapseError("solve: line search collapsed at iteration " +
                                    std::to_string(m) + " (step " + std::to_string(step) + ")");
    }

    current = std::move(candidate);
    f_current = f_candidate;
    const double objective_next = f_current + nonsmooth_value(current, reg);
    if (!std::isfinite(objective_next))
      throw NumericalError("solve: non-finite objective at iteration " + std::to_string(m));

    report.backtrack_counts.push_back(backtracks);
    report.objective_trace.push_back(objective_next);
    report.iterations = m + 1;

    const double decrease = objective_current - objective_next;
    const double rel = decrease / std::max(std::abs(objective_current),
                                           std::numeric_limits<double>::min());
    objective_current = objective_next;
    if (rel < config.rel_tolerance) {
      report.converged = true;
      break;
    }
  }

  report.final_step = step;
  result.bundle = std::move(current);
  return result;
}

SolveResult solve(const MultiSystemDataset& dataset, const SolverConfig& config,
                  const std::optional<MatrixBundle>& initial) {
  return solve_compiled(compile(dataset), config, initial);
}

double objective(const MultiSystemDataset& dataset, const MatrixBundle& bundle,
                 const RegularizerSpec& spec) {
  dataset.validate();
  bundle.validate();
  if (bundle.count() != dataset.num_systems() || bundle.dim() != dataset.state_dim())
    throw InputError("objective: bundle shape does not match the dataset");
  double loss = 0.0;
  for (int i = 0; i < dataset.num_systems(); ++i)
    loss += ls_loss(bundle.matrices[static_cast<std::size_t>(i)],
                    dataset.entries[static_cast<std::size_t>(i)].trajectory,
                    dataset.entries[static_cast<std::size_t>(i)].b);
  return loss + weighted_regularizer_value(bundle, spec);
}

double lambda_max_compiled(const CompiledDataset& data) {
  if (data.num_systems() == 0) throw InputError("lambda_max: empty dataset");
  const int n = data.state_dim;
  const Matrix zero = Matrix::Zero(n, n);
  Eigen::ArrayXXd norm_sq = Eigen::ArrayXXd::Zero(n, n);
  for (const auto& sys : data.systems)
    norm_sq += compiled_gradient(zero, sys).array().square();
  return std::sqrt(norm_sq.maxCoeff());
}

double lambda_max(const MultiSystemDataset& dataset) {
  return lambda_max_compiled(compile(dataset));
}

}  // namespace mtsysid
