#include "reinsure/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

namespace reinsure {

PropertyReport make_report(std::string name, double worst, double tolerance, std::string location,
                           std::string details) {
  PropertyReport report;
  report.name = std::move(name);
  report.worst_violation = worst;
  report.tolerance = tolerance;
  report.passed = worst <= tolerance;
  report.location = std::move(location);
  report.details = std::move(details);
  return report;
}

namespace {

std::string node_label(std::size_t j) { return "node " + std::to_string(j); }

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

std::vector<PropertyReport> check_value_structure(const ValueGrid& values) {
  const auto& grid = values.grid;
  const auto& psi = values.psi;
  const std::size_t n = grid.size();
  const double scale = std::max(1.0, max_abs(psi));
  std::vector<PropertyReport> out;

  out.push_back(make_report("value_at_zero", std::abs(psi[0]), 0.0, node_label(0)));

  double worst = -std::numeric_limits<double>::infinity();
  std::size_t where = 1;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double drop = psi[j] - psi[j + 1];
    if (drop > worst) {
      worst = drop;
      where = j + 1;
    }
  }
  out.push_back(make_report("monotone", worst, 1e-8 * scale, node_label(where)));

  worst = -std::numeric_limits<double>::infinity();
  double max_slope = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double slope = (psi[j + 1] - psi[j]) / (grid.x(j + 1) - grid.x(j));
    max_slope = std::max(max_slope, slope);
    if (1.0 - slope > worst) {
      worst = 1.0 - slope;
      where = j + 1;
    }
  }
  out.push_back(make_report("slope_at_least_one", worst, 1e-8, node_label(where)));

  worst = -std::numeric_limits<double>::infinity();
  const double k_bound = psi[1] / grid.x(1);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double rise = psi[j + 1] / grid.x(j + 1) - psi[j] / grid.x(j);
    if (rise > worst) {
      worst = rise;
      where = j + 1;
    }
  }
  std::ostringstream bound;
  bound << "K = V_1/x_1 = " << k_bound;
  out.push_back(make_report("ratio_nonincreasing", worst, 1e-8 * std::max(1.0, k_bound),
                            node_label(where), bound.str()));

  std::ostringstream lip;
  lip << "max discrete slope = " << max_slope;
  out.push_back(make_report("lipschitz_finite", std::isfinite(max_slope) ? 0.0 : max_slope,
                            0.0, {}, lip.str()));
  return out;
}

PropertyReport check_vi_residual(const ModelParams& params, const ValueGrid& values,
                                 const ResidualConfig& config) {
  const auto& grid = values.grid;
  const auto levels = control_levels(params, config.control_points);
  double worst = 0.0;
  std::size_t where = 1;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    double residual = obstacle_residual(grid, values.psi, j);
    if (j < grid.top()) {
      for (double u : levels)
        residual = std::max(
            residual, discrete_hamiltonian(params, grid, values.psi, j, u, config.jump_formula));
    }
    if (std::abs(residual) > worst) {
      worst = std::abs(residual);
      where = j;
    }
  }
  return make_report("vi_residual", worst, config.tol, node_label(where));
}

ValueIterationResult value_iteration(const ModelParams& params, const SolverConfig& config,
                                     double tol, std::size_t max_iter) {
  const std::size_t n = config.grid_n;
  const double h = 1.0 / static_cast<double>(n);
  std::vector<double> y(n), x(n);
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = static_cast<double>(j) * h;
    x[j] = y[j] / (1.0 - y[j]);
  }

  // Per control: drift coefficient a p(u) and post-claim fraction per atom.
  struct Control {
    double growth;
    std::vector<double> keep; // 1 - c, or <= 0 for ruin
  };
  std::vector<Control> controls;
  for (double u : control_levels(params, config.control_points)) {
    Control c{params.a() * premium_rate(params, u), {}};
    for (const auto& atom : params.claims().atoms())
      c.keep.push_back(1.0 - params.a() * params.rho() * std::min(atom.size, u));
    controls.push_back(std::move(c));
  }

  auto target = [&](double yj, double keep) {
    if (config.jump_formula == JumpFormula::derived) {
      if (keep <= 0.0) return -1.0;
      // X' = X keep, mapped back to y.
      const double xj = yj / (1.0 - yj);
      const double xp = xj * keep;
      return xp / (1.0 + xp);
    }
    const double c = 1.0 - keep;
    const double num = yj * (1.0 - c) - c;
    return num <= 0.0 ? -1.0 : num / (c * yj + 1.0 - c);
  };
  auto lookup = [&](const std::vector<double>& psi, double yt) {
    if (yt <= 0.0) return 0.0;
    if (yt >= y[n - 1]) return psi[n - 1] + (yt / (1.0 - yt) - x[n - 1]);
    const double pos = yt * static_cast<double>(n);
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(k);
    return psi[k] + w * (psi[k + 1] - psi[k]);
  };

  ValueIterationResult out;
  std::vector<double> psi(x);
  std::vector<double> next(n, 0.0);
  const double r = params.r();
  const double beta = params.beta();
  const auto atoms = params.claims().atoms();
  for (std::size_t iter = 1; iter <= max_iter; ++iter) {
    next[0] = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double best = psi[j - 1] + (x[j] - x[j - 1]);
      for (const auto& c : controls) {
        const double rate = c.growth * y[j] * (1.0 - y[j]) / h;
        double jump = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i)
          jump += atoms[i].prob * lookup(psi, target(y[j], c.keep[i]));
        best = std::max(best, (rate * psi[j + 1] + beta * jump) / (r + rate + beta));
      }
      next[j] = best;
    }
    next[n - 1] = psi[n - 2] + (x[n - 1] - x[n - 2]);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) change = std::max(change, std::abs(next[j] - psi[j]));
    psi.swap(next);
    out.iterations = iter;
    out.last_change = change;
    if (change <= tol * std::max(1.0, max_abs(psi))) {
      out.converged = true;
      break;
    }
  }
  out.psi = std::move(psi);
  return out;
}

PropertyReport check_dpp_oracle(const ModelParams& params, const SolverConfig& coarse, double tol) {
  if (coarse.grid_n > 50 || coarse.control_points > 5)
    throw std::invalid_argument("oracle check needs n <= 50 and at most 5 controls");
  SolverConfig cfg = coarse;
  cfg.tol = std::min(cfg.tol, 1e-11);
  cfg.eval_tol = std::min(cfg.eval_tol, 1e-13);
  const auto pi = solve(params, cfg);
  const auto vi = value_iteration(params, coarse);
  double worst = 0.0;
  std::size_t where = 0;
  for (std::size_t j = 0; j < vi.psi.size(); ++j) {
    const double d = std::abs(vi.psi[j] - pi.values.psi[j]);
    if (d > worst) {
      worst = d;
      where = j;
    }
  }
  std::ostringstream details;
  details << "policy iteration " << pi.report.iterations << " steps (converged "
          << pi.report.converged << "), value iteration " << vi.iterations << " sweeps (converged "
          << vi.converged << ")";
  auto report = make_report("dpp_oracle", worst, tol, node_label(where), details.str());
  if (!pi.report.converged || !vi.converged) report.passed = false;
  return report;
}

std::vector<NamedPolicy> audit_library(const ModelParams& params, const FeedbackPolicy& solved) {
  const double lo = params.u_min();
  const double hi = params.u_max();
  const double mid = 0.5 * (lo + hi);
  const double b = std::isfinite(solved.barrier()) ? solved.barrier() : 1.0;
  return {
      {"min_retention_same_barrier", FeedbackPolicy::constant(lo, b)},
      {"max_retention_double_barrier", FeedbackPolicy::constant(hi, 2.0 * b)},
      {"mid_retention_same_barrier", FeedbackPolicy::constant(mid, b)},
      {"max_retention_pay_all", FeedbackPolicy::constant(hi, 0.0)},
      {"min_retention_barrier_10", FeedbackPolicy::constant(lo, 10.0)},
      {"max_retention_barrier_10", FeedbackPolicy::constant(hi, 10.0)},
      {"max_retention_never_pay",
       FeedbackPolicy::constant(hi, std::numeric_limits<double>::infinity())},
  };
}

RefinementStudy refinement_study(const ModelParams& params, const SolverConfig& base,
                                 const std::vector<std::size_t>& sizes) {
  std::map<std::size_t, std::vector<double>> solved;
  auto values_at = [&](std::size_t n) -> const std::vector<double>& {
    auto it = solved.find(n);
    if (it == solved.end()) {
      SolverConfig cfg = base;
      cfg.grid_n = n;
      it = solved.emplace(n, solve(params, cfg).values.psi).first;
    }
    return it->second;
  };

  RefinementStudy study;
  study.grid_sizes = sizes;
  for (std::size_t n : sizes) {
    const auto& coarse = values_at(n);
    const auto& fine = values_at(2 * n);
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(coarse[j] - fine[2 * j]));
    study.sup_diffs.push_back(d);
    study.constant = std::max(study.constant, d * static_cast<double>(n));
  }
  for (std::size_t i = 0; i + 1 < study.sup_diffs.size(); ++i)
    study.ratios.push_back(study.sup_diffs[i] / study.sup_diffs[i + 1]);
  return study;
}

double estimate_grid_error_constant(const ModelParams& params, const SolverConfig& base,
                                    const std::vector<std::size_t>& coarse_sizes,
                                    const std::vector<double>& test_points, const McConfig& mc) {
  double constant = 0.0;
  for (std::size_t n : coarse_sizes) {
    SolverConfig cfg = base;
    cfg.grid_n = n;
    const auto result = solve(params, cfg);
    const auto policy = extract_policy(result.values);
    for (double x0 : test_points) {
      const auto est = estimate_value(params, policy, x0, mc);
      const double excess =
          std::abs(est.mean - result.values.value_at(x0)) - 3.0 * est.std_error;
      constant = std::max(constant, excess * static_cast<double>(n));
    }
  }
  return constant;
}

PropertyReport check_cross_validation(const ModelParams& params, const ValueGrid& values,
                                      const FeedbackPolicy& policy,
                                      const std::vector<double>& test_points, const McConfig& mc,
                                      double grid_error_constant) {
  const double h = values.grid.h();
  double worst = -std::numeric_limits<double>::infinity();
  std::string where;
  std::ostringstream details;
  details.precision(10);
  const auto library = audit_library(params, policy);
  for (double x0 : test_points) {
    const double v = values.value_at(x0);
    const auto est = estimate_value(params, policy, x0, mc);
    const double gap = std::abs(est.mean - v) - (3.0 * est.std_error + grid_error_constant * h);
    details << "x0=" << x0 << " V=" << v << " MC=" << est.mean << "+-" << est.std_error << "; ";
    if (gap > worst) {
      worst = gap;
      where = "x0=" + std::to_string(x0) + " extracted";
    }
    for (const auto& alt : library) {
      const auto alt_est = estimate_value(params, alt.policy, x0, mc);
      const double excess = alt_est.mean - (v + 3.0 * alt_est.std_error);
      if (excess > worst) {
        worst = excess;
        where = "x0=" + std::to_string(x0) + " " + alt.name;
      }
    }
  }
  details << "C=" << grid_error_constant << " h=" << h;
  return make_report("cross_validation", worst, 0.0, where, details.str());
}


std::vector<PropertyReport> run_suite(const ModelParams& params, const SuiteConfig& config,
                                      const ValueGrid* provided) {
  std::vector<PropertyReport> reports;
  std::optional<SolveResult> solved;
  if (!provided) {
    solved = solve(params, config.solver);
    auto converged = make_report("solver_converged", solved->report.sup_residual,
                                 config.solver.tol, {},
                                 "iterations " + std::to_string(solved->report.iterations));
    if (!solved->report.converged) converged.passed = false;
    reports.push_back(converged);
    reports.push_back(make_report("m_matrix", solved->report.m_matrix_ok ? 0.0 : 1.0, 0.0));
  }
  const ValueGrid& values = provided ? *provided : solved->values;

  for (auto& r : check_value_structure(values)) reports.push_back(std::move(r));
  ResidualConfig residual;
  residual.control_points = config.solver.control_points;
  residual.jump_formula = config.solver.jump_formula;
  reports.push_back(check_vi_residual(params, values, residual));

  SolverConfig coarse = config.solver;
  coarse.grid_n = config.oracle_n;
  coarse.control_points = config.oracle_controls;
  reports.push_back(check_dpp_oracle(params, coarse));

  const double horizon = config.mc.horizon > 0.0 ? config.mc.horizon : default_horizon(params);
  ScriptedStrategy scripted;
  scripted.retention = params.u_max();
  scripted.lumps = {{0.5, 0.25}, {2.0, 0.5}, {10.0, 0.1}};
  const auto paired = paired_paths(params, scripted, 1.0, 2.0, config.pairs, config.mc.seed, horizon);
  reports.push_back(make_report("comparison_paths", static_cast<double>(paired.violations), 0.0,
                                "pair " + std::to_string(paired.worst_pair),
                                std::to_string(paired.comparisons) + " comparisons"));
  const auto scaled = scaled_paths(params, scripted, 1.0, 1.0, config.pairs, config.mc.seed, horizon);
  reports.push_back(make_report("scaling_paths", static_cast<double>(scaled.violations), 0.0,
                                "pair " + std::to_string(scaled.worst_pair)));

  const auto policy = extract_policy(values);
  const auto never_pay =
      FeedbackPolicy::constant(params.u_max(), std::numeric_limits<double>::infinity());
  double worst_growth = 0.0;
  std::size_t worst_path = 0;
  for (std::size_t k = 0; k < std::min<std::size_t>(config.mc.paths, 10000); ++k) {
    CounterRng rng(config.mc.seed, k);
    const auto rec = simulate_path(params, never_pay, 1.0, horizon, rng);
    if (rec.growth_ratio - 1.0 > worst_growth) {
      worst_growth = rec.growth_ratio - 1.0;
      worst_path = k;
    }
  }
  reports.push_back(
      make_report("growth_bound", worst_growth, 1e-12, "path " + std::to_string(worst_path)));

  CounterexampleConfig ce;
  ce.r = params.r();
  ce.paths = config.mc.paths;
  ce.seed = config.mc.seed;
  const auto counter = counterexample_collective(ce);
  reports.push_back(make_report("counterexample",
                                std::abs(counter.dividend.mean - counter.analytic),
                                3.0 * counter.dividend.std_error));

  SolverConfig base = config.solver;
  std::vector<std::size_t> coarse_sizes;
  for (std::size_t n = values.grid.size() / 4; n >= 50 && coarse_sizes.size() < 2; n *= 2)
    coarse_sizes.push_back(n);
  const double c =
      estimate_grid_error_constant(params, base, coarse_sizes, config.test_points, config.mc);
  reports.push_back(check_cross_validation(params, values, policy, config.test_points, config.mc, c));
  return reports;
}

} // namespace reinsure
