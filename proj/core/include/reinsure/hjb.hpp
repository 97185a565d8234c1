#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reinsure/model.hpp"

namespace reinsure {

/// y = x / (x + 1), mapping reserves [0, inf) onto [0, 1).
double to_transformed(double x);
/// x = y / (1 - y).  Throws std::domain_error for y >= 1 or y < 0.
double to_reserve(double y);

/// Uniform mesh y_j = j / n, j = 0..n-1, on the transformed domain [0, 1 - h].
class Grid {
public:
  explicit Grid(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double y(std::size_t j) const noexcept { return static_cast<double>(j) * h_; }
  double x(std::size_t j) const noexcept { return x_[j]; }
  std::span<const double> reserves() const noexcept { return x_; }
  std::size_t top() const noexcept { return n_ - 1; }

private:
  std::size_t n_;
  double h_;
  std::vector<double> x_;
};

/// Jump target in transformed coordinates.  `derived` follows the
/// multiplicative claim X -> X (1 - c); `printed` is the alternative closed
/// form (y (1 - c) - c) / (c y + 1 - c).
enum class JumpFormula { derived, printed };

std::string to_string(JumpFormula formula);
JumpFormula parse_jump_formula(const std::string& text);

/// Post-claim transformed reserve for relative jump size c.  A result <= 0
/// signals ruin.
double jump_destination(double y, double c, JumpFormula formula = JumpFormula::derived);

/// Linear interpolation of psi at y' on the grid.  Ruin (y' <= 0) is worth 0;
/// above the top node psi continues with unit slope in reserve coordinates.
double interpolate(const Grid& grid, std::span<const double> psi, double y_target);

/// Solved value function on the grid.  V(x_j) = psi[j].
struct ValueGrid {
  Grid grid;
  std::vector<double> psi;
  std::vector<double> u_star;
  std::vector<bool> dividend_flag;

  explicit ValueGrid(Grid g);

  /// V at an arbitrary reserve by interpolation in y.
  double value_at(double x) const;
};

/// Uniformly spaced retention levels on [u_min, u_max].
std::vector<double> control_levels(const ModelParams& params, std::size_t count);

/// G at interior node j under retention u:
///   -r psi_j + a p(u) y_j (1 - y_j) D psi_j + beta sum_i p_i [psi~(y'_i) - psi_j]
/// with D the forward difference (backward at the top node).
double discrete_hamiltonian(const ModelParams& params, const Grid& grid,
                            std::span<const double> psi, std::size_t j, double u,
                            JumpFormula formula = JumpFormula::derived);

/// Dividend constraint 1 - V' at node j >= 1, with V' taken as the backward
/// difference quotient (psi_j - psi_{j-1}) / (x_j - x_{j-1}).
double obstacle_residual(const Grid& grid, std::span<const double> psi, std::size_t j);

struct SolverConfig {
  std::size_t grid_n = 2000;
  std::size_t control_points = 101;
  double tol = 1e-8;              // outer sup-residual tolerance
  double eval_tol = 1e-10;        // policy-evaluation residual tolerance
  std::size_t max_iter = 500;     // policy-iteration steps
  std::size_t max_sweeps = 1000000; // Gauss-Seidel sweeps per evaluation
  double relaxation = 1.0;        // Gauss-Seidel damping factor in (0, 1]
  JumpFormula jump_formula = JumpFormula::derived;
  bool require_assumptions = true; // reject parameters violating A2
};

struct SolveReport {
  std::size_t iterations = 0;
  double sup_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::size_t policy_changes_last_iter = 0;
  std::size_t total_sweeps = 0;
  bool m_matrix_ok = true;
  double seconds = 0.0;
};

struct SolveResult {
  ValueGrid values;
  SolveReport report;
};

/// Thrown by solve() when the model violates an assumption it requires.
class AssumptionViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Howard policy iteration on the discrete variational inequality
/// max{ max_u G_j(u), 1 - V'_j } = 0, psi_0 = 0.
SolveResult solve(const ModelParams& params, const SolverConfig& config = {});

/// Executable strategy: piecewise-constant retention by nearest node plus
/// a dividend barrier above which the excess is paid out.
class FeedbackPolicy {
public:
  static FeedbackPolicy constant(double retention, double barrier);

  double retention(double x) const;
  double barrier() const noexcept { return barrier_; }
  bool single_dividend_region() const noexcept { return single_region_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  friend FeedbackPolicy extract_policy(const ValueGrid& values);

private:
  std::vector<double> nodes_;
  std::vector<double> levels_;
  double barrier_ = std::numeric_limits<double>::infinity();
  bool single_region_ = true;
  std::vector<std::string> warnings_;
};

FeedbackPolicy extract_policy(const ValueGrid& values);

} // namespace reinsure
