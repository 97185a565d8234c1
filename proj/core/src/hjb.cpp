#include "reinsure/hjb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace reinsure {

double to_transformed(double x) {
  if (!(x >= 0.0)) throw std::domain_error("reserve must be nonnegative");
  if (std::isinf(x)) return 1.0;
  return x / (x + 1.0);
}

double to_reserve(double y) {
  if (!(y >= 0.0 && y < 1.0)) throw std::domain_error("transformed reserve must lie in [0, 1)");
  return y / (1.0 - y);
}

Grid::Grid(std::size_t n) : n_(n), h_(1.0 / static_cast<double>(n)) {
  if (n < 3) throw std::invalid_argument("grid needs at least 3 nodes");
  x_.resize(n_);
  for (std::size_t j = 0; j < n_; ++j) x_[j] = to_reserve(y(j));
}

std::string to_string(JumpFormula formula) {
  return formula == JumpFormula::derived ? "derived" : "printed";
}

JumpFormula parse_jump_formula(const std::string& text) {
  if (text == "derived") return JumpFormula::derived;
  if (text == "printed") return JumpFormula::printed;
  throw std::invalid_argument("jump formula must be 'derived' or 'printed', got '" + text + "'");
}

double jump_destination(double y, double c, JumpFormula formula) {
  if (formula == JumpFormula::derived) {
    if (c >= 1.0) return y > 0.0 ? -1.0 : 0.0;
    return y * (1.0 - c) / (1.0 - c * y);
  }
  const double numerator = y * (1.0 - c) - c;
  if (numerator <= 0.0) return numerator;
  return numerator / (c * y + 1.0 - c);
}

double interpolate(const Grid& grid, std::span<const double> psi, double y_target) {
  if (y_target <= 0.0) return 0.0;
  const std::size_t top = grid.top();
  const double y_top = grid.y(top);
  if (y_target >= y_top) {
    if (y_target >= 1.0) return std::numeric_limits<double>::infinity();
    return psi[top] + (to_reserve(y_target) - grid.x(top));
  }
  const double s = y_target / grid.h();
  auto k = static_cast<std::size_t>(s);
  if (k >= top) k = top - 1;
  const double w = s - static_cast<double>(k);
  return (1.0 - w) * psi[k] + w * psi[k + 1];
}

ValueGrid::ValueGrid(Grid g)
    : grid(std::move(g)), psi(grid.size(), 0.0), u_star(grid.size(), 0.0),
      dividend_flag(grid.size(), false) {}

double ValueGrid::value_at(double x) const { return interpolate(grid, psi, to_transformed(x)); }

std::vector<double> control_levels(const ModelParams& params, std::size_t count) {
  const double lo = params.u_min();
  const double hi = params.u_max();
  if (count < 2 || hi <= lo) return {hi};
  std::vector<double> levels(count);
  for (std::size_t i = 0; i < count; ++i)
    levels[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  levels.back() = hi;
  return levels;
}

namespace {

// One linear row of the discrete operator for a fixed action:
//   value = constant + up * psi[j+1] + sum_k w_k psi[k] - diag * psi[j]
struct Row {
  double diag = 0.0;
  double up = 0.0;
  double constant = 0.0;
  // At most two interpolation nodes per claim atom.
  std::vector<std::pair<std::size_t, double>> lower;

  double apply(std::span<const double> psi, std::size_t j) const {
    double v = constant - diag * psi[j];
    if (up != 0.0) v += up * psi[j + 1];
    for (const auto& [k, w] : lower) v += w * psi[k];
    return v;
  }
};

class Operator {
public:
  Operator(const ModelParams& params, const Grid& grid, std::vector<double> controls,
           JumpFormula formula)
      : params_(params), grid_(grid), controls_(std::move(controls)), formula_(formula) {
    premiums_.reserve(controls_.size());
    for (double u : controls_) premiums_.push_back(premium_rate(params_, u));
  }

  const std::vector<double>& controls() const { return controls_; }

  // G row at node j for control index i.  Forward difference in the drift
  // except at the top node, where only the backward difference exists.
  void hamiltonian_row(std::size_t j, std::size_t i, Row& row) const {
    const double y = grid_.y(j);
    const double h = grid_.h();
    const double drift = params_.a() * premiums_[i] * y * (1.0 - y);
    const double beta = params_.beta();
    row.lower.clear();
    row.constant = 0.0;
    row.diag = params_.r() + beta;
    row.up = 0.0;
    if (j < grid_.top()) {
      row.diag += drift / h;
      row.up = drift / h;
    } else {
      row.diag -= drift / h;
      row.lower.emplace_back(j - 1, -drift / h);
    }
    if (beta == 0.0) return;
    for (const auto& atom : params_.claims().atoms()) {
      const double c = params_.jump_fraction(atom.size, controls_[i]);
      const double target = jump_destination(y, c, formula_);
      add_interpolation(target, beta * atom.prob, row);
    }
  }

  double hamiltonian(std::span<const double> psi, std::size_t j, std::size_t i) const {
    hamiltonian_row(j, i, scratch_);
    return scratch_.apply(psi, j);
  }

private:
  void add_interpolation(double target, double weight, Row& row) const {
    if (target <= 0.0) return; // ruin is worth nothing
    const std::size_t top = grid_.top();
    if (target >= grid_.y(top)) {
      row.lower.emplace_back(top, weight);
      row.constant += weight * (to_reserve(target) - grid_.x(top));
      return;
    }
    const double s = target / grid_.h();
    auto k = static_cast<std::size_t>(s);
    if (k >= top) k = top - 1;
    const double w = s - static_cast<double>(k);
    if (w < 1.0) row.lower.emplace_back(k, weight * (1.0 - w));
    if (w > 0.0) row.lower.emplace_back(k + 1, weight * w);
  }

  const ModelParams& params_;
  const Grid& grid_;
  std::vector<double> controls_;
  std::vector<double> premiums_;
  JumpFormula formula_;
  mutable Row scratch_;
};

constexpr std::ptrdiff_t kPay = -1;

struct Improvement {
  std::size_t changes = 0;
  double sup_residual = 0.0;
};

} // namespace

double discrete_hamiltonian(const ModelParams& params, const Grid& grid,
                            std::span<const double> psi, std::size_t j, double u,
                            JumpFormula formula) {
  if (j == 0 || j > grid.top()) throw std::out_of_range("hamiltonian needs 1 <= j <= n-1");
  Operator op(params, grid, {u}, formula);
  return op.hamiltonian(psi, j, 0);
}

double obstacle_residual(const Grid& grid, std::span<const double> psi, std::size_t j) {
  if (j == 0 || j > grid.top()) throw std::out_of_range("obstacle needs 1 <= j <= n-1");
  return 1.0 - (psi[j] - psi[j - 1]) / (grid.x(j) - grid.x(j - 1));
}

SolveResult solve(const ModelParams& params, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.require_assumptions) {
    const auto check = validate_assumptions(params);
    if (!check.a2_ok) throw AssumptionViolation(check.messages.front());
  }
  if (!(config.relaxation > 0.0 && config.relaxation <= 1.0))
    throw std::invalid_argument("relaxation must lie in (0, 1]");

  Grid grid(config.grid_n);
  Operator op(params, grid, control_levels(params, config.control_points), config.jump_formula);
  const std::size_t n = grid.size();
  const std::size_t top = grid.top();
  const auto& controls = op.controls();

  SolveResult result{ValueGrid(grid), {}};
  auto& psi = result.values.psi;
  auto& report = result.report;
  for (std::size_t j = 0; j < n; ++j) psi[j] = grid.x(j); // immediate payout

  std::vector<std::ptrdiff_t> action(n, kPay);
  std::vector<Row> rows(n);

  // Picks, per node, the action with the largest residual; keeps the current
  // action on ties.  Retention ties resolve to the larger level.
  auto improve = [&](bool first) {
    Improvement out;
    for (std::size_t j = 1; j < n; ++j) {
      double best_g = -std::numeric_limits<double>::infinity();
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < controls.size(); ++i) {
        const double g = op.hamiltonian(psi, j, i);
        if (g >= best_g) {
          best_g = g;
          best_i = i;
        }
      }
      const double obstacle = obstacle_residual(grid, psi, j);
      result.values.u_star[j] = controls[best_i];
      out.sup_residual = std::max(
          out.sup_residual, std::abs(j == top ? obstacle : std::max(best_g, obstacle)));

      std::ptrdiff_t next = kPay;
      if (j < top) {
        const auto current = action[j];
        const double current_value =
            current == kPay ? obstacle : op.hamiltonian(psi, j, static_cast<std::size_t>(current));
        const double best_value = std::max(best_g, obstacle);
        if (!first && current_value >= best_value) {
          next = current;
        } else {
          next = obstacle >= best_g ? kPay : static_cast<std::ptrdiff_t>(best_i);
        }
      }
      if (next != action[j]) ++out.changes;
      action[j] = next;
    }
    result.values.u_star[0] = controls.back();
    return out;
  };

  auto assemble = [&]() {
    for (std::size_t j = 1; j < n; ++j) {
      Row& row = rows[j];
      if (action[j] == kPay) {
        // 1 - (psi_j - psi_{j-1}) / dx, scaled by dx.
        const double dx = grid.x(j) - grid.x(j - 1);
        row.lower.assign({{j - 1, 1.0}});
        row.diag = 1.0;
        row.up = 0.0;
        row.constant = dx;
      } else {
        op.hamiltonian_row(j, static_cast<std::size_t>(action[j]), row);
      }
      // Monotonicity: positive net diagonal, nonnegative couplings, and
      // diagonal dominance.
      double self = 0.0, off = row.up;
      bool signs_ok = row.up >= 0.0;
      for (const auto& [k, w] : row.lower) {
        if (k == j) self += w;
        else off += w;
        signs_ok = signs_ok && w >= 0.0;
      }
      const double net = row.diag - self;
      if (!signs_ok || !(net > 0.0) || net < off * (1.0 - 1e-14)) report.m_matrix_ok = false;
    }
  };

  // Gauss-Seidel in increasing node order until every row residual is small.
  auto evaluate = [&]() {
    for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
      ++report.total_sweeps;
      for (std::size_t j = 1; j < n; ++j) {
        const Row& row = rows[j];
        double self = 0.0;
        double rhs = row.constant + (row.up != 0.0 ? row.up * psi[j + 1] : 0.0);
        for (const auto& [k, w] : row.lower) {
          if (k == j) self += w;
          else rhs += w * psi[k];
        }
        const double updated = rhs / (row.diag - self);
        psi[j] = (1.0 - config.relaxation) * psi[j] + config.relaxation * updated;
      }
      double residual = 0.0;
      for (std::size_t j = 1; j < n; ++j) residual = std::max(residual, std::abs(rows[j].apply(psi, j)));
      if (residual <= config.eval_tol) return;
    }
  };

  improve(true);
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    report.iterations = iter;
    assemble();
    evaluate();
    const auto step = improve(false);
    report.policy_changes_last_iter = step.changes;
    report.sup_residual = step.sup_residual;
    if (step.changes == 0 && step.sup_residual <= config.tol) {
      report.converged = true;
      break;
    }
  }

  for (std::size_t j = 1; j < n; ++j) result.values.dividend_flag[j] = action[j] == kPay;
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FeedbackPolicy FeedbackPolicy::constant(double retention, double barrier) {
  FeedbackPolicy policy;
  policy.nodes_ = {0.0};
  policy.levels_ = {retention};
  policy.barrier_ = barrier;
  return policy;
}

double FeedbackPolicy::retention(double x) const {
  if (nodes_.size() == 1) return levels_.front();
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  if (it == nodes_.end()) return levels_.back();
  const auto k = static_cast<std::size_t>(it - nodes_.begin());
  if (k == 0) return levels_.front();
  return (x - nodes_[k - 1] <= *it - x) ? levels_[k - 1] : levels_[k];
}

FeedbackPolicy extract_policy(const ValueGrid& values) {
  FeedbackPolicy policy;
  const auto x = values.grid.reserves();
  policy.nodes_.assign(x.begin(), x.end());
  policy.levels_ = values.u_star;

  std::size_t first = 0;
  for (std::size_t j = 1; j < values.grid.size(); ++j) {
    if (values.dividend_flag[j]) {
      first = j;
      break;
    }
  }
  if (first == 0) {
    policy.barrier_ = std::numeric_limits<double>::infinity();
    policy.warnings_.push_back("no dividend node on the grid; barrier set to infinity");
    return policy;
  }
  policy.barrier_ = values.grid.x(first);
  for (std::size_t j = first + 1; j < values.grid.size(); ++j) {
    if (!values.dividend_flag[j]) {
      policy.single_region_ = false;
      std::ostringstream msg;
      msg << "dividend region is not a single interval: node " << j << " (x = "
          << values.grid.x(j) << ") lies above the barrier but is not flagged";
      policy.warnings_.push_back(msg.str());
      break;
    }
  }
  return policy;
}

} // namespace reinsure
