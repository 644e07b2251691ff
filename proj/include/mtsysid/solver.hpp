#pragma once

#include <optional>
#include <vector>

#include "mtsysid/estimators.hpp"
#include "mtsysid/prox.hpp"
#include "mtsysid/types.hpp"

namespace mtsysid {

struct SolverConfig {
  double initial_step = 1.0;     // eta^(0)
  double backtrack_factor = 0.5; // beta in (0, 1)
  RegularizerSpec regularizer;
  int max_iterations = 5000;
  double rel_tolerance = 1e-9;   // relative objective decrease
  int max_backtracks_per_iter = 60;

  // Plain proximal-gradient mode: no line search, user-supplied fixed step.
  bool use_line_search = true;
  double fixed_step = 0.0;

  void validate() const {
    if (initial_step <= 0.0) throw InputError("SolverConfig: initial_step must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
      throw InputError("SolverConfig: backtrack_factor must lie in (0, 1)");
    if (max_iterations <= 0) throw InputError("SolverConfig: max_iterations must be positive");
    if (rel_tolerance <= 0.0) throw InputError("SolverConfig: rel_tolerance must be positive");
    if (max_backtracks_per_iter <= 0)
      throw InputError("SolverConfig: max_backtracks_per_iter must be positive");
    if (!use_line_search && fixed_step <= 0.0)
      throw InputError("SolverConfig: fixed_step must be positive without line search");
    regularizer.validate();
  }
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> objective_trace;  // smooth loss + weighted regularizer, entry 0 = initial
  double final_step = 0.0;
  bool converged = false;
  std::vector<int> backtrack_counts;
};

struct SolveResult {
  MatrixBundle bundle;
  SolveReport report;
};

/// Proximal gradient with backtracking line search on
///   sum_i L_i(A_i) + weighted regularizer.
/// Per iteration: gradient step on the smooth part (the deviation term joins
/// the smooth part in the composite case), closed-form prox of the nonsmooth
/// part, sufficient-decrease test with the 1/(2 alpha) quadratic, step
/// shrinkage by beta on failure, and the accepted step carried into the next
/// iteration. Stops when the relative objective decrease falls below
/// rel_tolerance or max_iterations is reached.
SolveResult solve(const MultiSystemDataset& dataset, const SolverConfig& config,
                  const std::optional<MatrixBundle>& initial = std::nullopt);

/// Same solver over a pre-compiled dataset (multiple regression blocks per
/// system); what cross-validation drives.
SolveResult solve_compiled(const CompiledDataset& compiled, const SolverConfig& config,
                           const std::optional<MatrixBundle>& initial = std::nullopt);

/// Full objective: sum of LS fits plus the weighted regularizer.
double objective(const MultiSystemDataset& dataset, const MatrixBundle& bundle,
                 const RegularizerSpec& spec);

/// Smallest group-sparsity weight at which the all-zero bundle is optimal:
///   max_jk || [ (grad L_1(0))_jk, ..., (grad L_N(0))_jk ] ||_2.
/// Any lambda at or above it makes solve() return the zero bundle.
double lambda_max(const MultiSystemDataset& dataset);
double lambda_max_compiled(const CompiledDataset& compiled);

}  // namespace mtsysid
