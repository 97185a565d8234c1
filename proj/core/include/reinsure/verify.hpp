#pragma once

#include <string>
#include <vector>

#include "reinsure/hjb.hpp"
#include "reinsure/model.hpp"
#include "reinsure/simulate.hpp"

namespace reinsure {

/// Outcome of one executable property check.  passed iff
/// worst_violation <= tolerance.
struct PropertyReport {
  std::string name;
  bool passed = false;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::string location;
  std::string details;
};

PropertyReport make_report(std::string name, double worst, double tolerance,
                           std::string location = {}, std::string details = {});

/// Structural properties of a value grid: V(0) = 0, V nondecreasing,
/// discrete V' >= 1, V/x nonincreasing, finite Lipschitz constant.
std::vector<PropertyReport> check_value_structure(const ValueGrid& values);

struct ResidualConfig {
  std::size_t control_points = 101;
  JumpFormula jump_formula = JumpFormula::derived;
  double tol = 1e-6;
};

/// |max{ max_u G_j(u), 1 - V'_j }| at every node j >= 1, recomputed from psi
/// alone.  The top node carries the dividend boundary row only.
PropertyReport check_vi_residual(const ModelParams& params, const ValueGrid& values,
                                 const ResidualConfig& config = {});

/// Fixed-point value iteration on the discrete dynamic programming operator,
/// written independently of the policy-iteration solver.
struct ValueIterationResult {
  std::vector<double> psi;
  std::size_t iterations = 0;
  double last_change = 0.0;
  bool converged = false;
};

ValueIterationResult value_iteration(const ModelParams& params, const SolverConfig& config,
                                     double tol = 1e-12, std::size_t max_iter = 10000000);

/// Policy iteration against value iteration on a coarse grid (n <= 50,
/// at most 5 controls): sup-difference <= tol.
PropertyReport check_dpp_oracle(const ModelParams& params, const SolverConfig& coarse,
                                double tol = 1e-8);

struct NamedPolicy {
  std::string name;
  FeedbackPolicy policy;
};

/// Fixed library of alternative barrier/retention strategies used to audit
/// the supremum property.
std::vector<NamedPolicy> audit_library(const ModelParams& params, const FeedbackPolicy& solved);

struct RefinementStudy {
  std::vector<std::size_t> grid_sizes;
  std::vector<double> sup_diffs; // sup over shared nodes of |V_n - V_2n|
  std::vector<double> ratios;    // sup_diffs[i] / sup_diffs[i+1]
  double constant = 0.0;         // max sup_diffs[i] / h_i
};

/// Solves at each size and its double; sizes must each double the previous.
RefinementStudy refinement_study(const ModelParams& params, const SolverConfig& base,
                                 const std::vector<std::size_t>& sizes);

/// Empirical grid-error constant C for |MC - V_grid| <= 3 se + C h: the
/// largest excess over 3 se per unit mesh width seen on the coarse levels.
double estimate_grid_error_constant(const ModelParams& params, const SolverConfig& base,
                                    const std::vector<std::size_t>& coarse_sizes,
                                    const std::vector<double>& test_points, const McConfig& mc);

/// Extracted policy simulated at each test point agrees with V_grid within
/// 3 se + C h, and no audited alternative beats V_grid by more than 3 se.
PropertyReport check_cross_validation(const ModelParams& params, const ValueGrid& values,
                                      const FeedbackPolicy& policy,
                                      const std::vector<double>& test_points, const McConfig& mc,
                                      double grid_error_constant);

struct SuiteConfig {
  SolverConfig solver;
  McConfig mc;
  std::vector<double> test_points{1.0, 5.0, 9.0};
  std::size_t oracle_n = 40;
  std::size_t oracle_controls = 5;
  std::size_t pairs = 10000;
};

/// Runs every check in declaration order: value structure, VI residual,
/// DPP oracle, pathwise comparison and scaling, growth bound, counter-example
/// agreement and PDE/MC cross-validation.  When `provided` is non-null its
/// grid is audited instead of a fresh solve for the grid-level checks.
std::vector<PropertyReport> run_suite(const ModelParams& params, const SuiteConfig& config,
                                      const ValueGrid* provided = nullptr);

} // namespace reinsure
