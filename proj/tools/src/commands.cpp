#include "commands.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "reinsure/csv.hpp"
#include "reinsure/hjb.hpp"
#include "reinsure/simulate.hpp"
#include "reinsure/verify.hpp"

namespace reinsure::cli {

namespace fs = std::filesystem;

RunConfig resolve_config(const Options& options) {
  RunConfig config = options.config ? load_config(*options.config) : RunConfig{};
  if (options.seed) config.mc.seed = *options.seed;
  if (options.grid_n) {
    if (*options.grid_n < 3) throw ConfigError("--grid-n must be at least 3");
    config.grid.n = *options.grid_n;
  }
  if (options.jump_formula) {
    try {
      config.solver.jump_formula = parse_jump_formula(*options.jump_formula);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  return config;
}

fs::path output_directory(const RunConfig& config, const Options& options) {
  return options.out ? *options.out : fs::path(config.output.directory);
}

namespace {

ModelParams make_params(const RunConfig& config) {
  try {
    return ModelParams(config.model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

void print_warnings(const ModelParams& params, std::ostream& log) {
  const auto check = validate_assumptions(params);
  for (const auto& m : check.messages) log << "warning: " << m << '\n';
}

// Maps exceptions to exit codes; everything unexpected is infrastructure.
int guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const AssumptionViolation& e) {
    log << "assumption violation: " << e.what() << '\n';
    return assumption_violation;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return infrastructure;
  }
}

void require_a2(const ModelParams& params) {
  const auto check = validate_assumptions(params);
  if (!check.a2_ok) throw AssumptionViolation(check.messages.front());
}

} // namespace

int cmd_solve(const Options& options, std::ostream& log) {
  return guarded(
      [&] {
        const auto config = resolve_config(options);
        const auto params = make_params(config);
        require_a2(params);
        print_warnings(params, log);

        const auto result = solve(params, config.solver_config());
        const auto policy = extract_policy(result.values);
        for (const auto& w : policy.warnings()) log << "warning: " << w << '\n';

        const auto dir = output_directory(config, options);
        csv::write_atomic(dir / "value_policy.csv", csv::value_policy(result.values));
        csv::write_atomic(dir / "solve_report.csv",
                          csv::solve_report(result.report, policy.barrier()));

        const auto& r = result.report;
        log << "solve: n=" << result.values.grid.size() << " iterations=" << r.iterations
            << " residual=" << r.sup_residual << " barrier=" << policy.barrier() << " ("
            << r.seconds << " s)\n";
        if (!r.converged) {
          log << "policy iteration did not converge within " << config.solver.max_iter
              << " steps\n";
          return static_cast<int>(non_convergence);
        }
        return static_cast<int>(ok);
      },
      log);
}

int cmd_simulate(const Options& options, std::ostream& log) {
  return guarded(
      [&] {
        const auto config = resolve_config(options);
        const auto params = make_params(config);
        const auto dir = output_directory(config, options);

        std::optional<FeedbackPolicy> policy;
        if (options.retention || options.barrier) {
          if (!options.retention || !options.barrier)
            throw ConfigError("--retention and --barrier must be given together");
          if (*options.retention < params.u_min() || *options.retention > params.u_max())
            throw ConfigError("--retention must lie in [" + csv::format(params.u_min()) + ", " +
                              csv::format(params.u_max()) + "]");
          policy = FeedbackPolicy::constant(*options.retention, *options.barrier);
        } else {
          const fs::path source = options.policy_csv ? *options.policy_csv : dir / "value_policy.csv";
          if (!fs::exists(source))
            throw ConfigError("missing policy source: no " + source.string() +
                              " (run solve first) and no --retention/--barrier");
          policy = extract_policy(csv::read_value_policy(source));
        }

        const auto mc = config.mc_config();
        const double horizon = mc.horizon > 0.0 ? mc.horizon : default_horizon(params);
        const std::vector<double> points = options.x0.empty() ? std::vector<double>{1.0} : options.x0;
        std::vector<csv::EstimateRow> rows;
        std::string dump;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double x0 = points[i];
          if (!(x0 >= 0.0) || !std::isfinite(x0)) throw ConfigError("--x0 values must be finite and >= 0");
          rows.push_back({x0, estimate_value(params, *policy, x0, mc)});
          log << "x0=" << x0 << " mean=" << rows.back().estimate.mean
              << " se=" << rows.back().estimate.std_error << '\n';
          for (std::size_t k = 0; k < std::min(options.dump_paths, mc.paths); ++k) {
            CounterRng rng(mc.seed, k);
            const auto record = simulate_path(params, *policy, x0, horizon, rng);
            dump += csv::path_events(i * options.dump_paths + k, record, dump.empty());
          }
        }
        csv::write_atomic(dir / "estimate_summary.csv", csv::estimates(rows));
        if (options.dump_paths > 0) csv::write_atomic(dir / "paths.csv", dump);
        return static_cast<int>(ok);
      },
      log);
}

int cmd_counterexample(const Options& options, std::ostream& log) {
  return guarded(
      [&] {
        const auto config = resolve_config(options);
        const auto params = make_params(config);

        CounterexampleConfig ce;
        ce.r = params.r();
        ce.paths = config.mc.paths;
        ce.seed = config.mc.seed;
        const auto result = counterexample_collective(ce);

        // Several-contract contrast: V at the smallest positive node.
        auto solver = config.solver_config();
        solver.require_assumptions = false;
        const auto grid = solve(params, solver);
        const double x1 = grid.values.grid.x(1);
        const double v1 = grid.values.psi[1];

        csv::CounterexampleRow row{params.r(), result, x1, v1, v1 / x1};
        const auto dir = output_directory(config, options);
        csv::write_atomic(dir / "counterexample.csv", csv::counterexample(row));
        log << "collective: analytic=" << result.analytic << " mc=" << result.dividend.mean
            << " se=" << result.dividend.std_error << "; several-contract V(x_1)=" << v1
            << " at x_1=" << x1 << '\n';
        return static_cast<int>(ok);
      },
      log);
}

int cmd_verify(const Options& options, std::ostream& log) {
  return guarded(
      [&] {
        const auto config = resolve_config(options);
        const auto params = make_params(config);
        require_a2(params);

        SuiteConfig suite;
        suite.solver = config.solver_config();
        suite.mc = config.mc_config();
        std::optional<ValueGrid> provided;
        if (options.grid_csv) provided = csv::read_value_policy(*options.grid_csv);

        const auto reports = run_suite(params, suite, provided ? &*provided : nullptr);
        const auto dir = output_directory(config, options);
        csv::write_atomic(dir / "verify_report.csv", csv::verify_report(reports));

        bool all = true;
        for (const auto& r : reports) {
          log << (r.passed ? "PASS " : "FAIL ") << r.name << " worst=" << r.worst_violation
              << " tol=" << r.tolerance;
          if (!r.location.empty()) log << " at " << r.location;
          log << '\n';
          all = all && r.passed;
        }
        return static_cast<int>(all ? ok : verification_failure);
      },
      log);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal dividends and reinsurance for a portfolio of contracts"};
  app.require_subcommand(1);
  Options options;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", options.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", options.seed, "Monte Carlo seed (overrides mc.seed)");
    sub->add_option("--grid-n", options.grid_n, "number of grid nodes (overrides grid.n)");
    sub->add_option("--jump-formula", options.jump_formula, "derived or printed")
        ->check(CLI::IsMember({"derived", "printed"}));
  };

  auto* solve_cmd = app.add_subcommand("solve", "solve the variational inequality on the grid");
  common(solve_cmd);
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo value of a policy");
  common(sim_cmd);
  sim_cmd->add_option("--x0", options.x0, "initial reserves")->delimiter(',');
  sim_cmd->add_option("--policy", options.policy_csv, "value_policy.csv to read the policy from");
  sim_cmd->add_option("--retention", options.retention, "constant retention level");
  sim_cmd->add_option("--barrier", options.barrier, "constant dividend barrier");
  sim_cmd->add_option("--dump-paths", options.dump_paths, "write events of the first N paths");
  auto* ce_cmd = app.add_subcommand("counterexample", "collective-model one-shot strategy");
  common(ce_cmd);
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  common(verify_cmd);
  verify_cmd->add_option("--grid", options.grid_csv, "audit this value_policy.csv instead of solving")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? static_cast<int>(ok) : static_cast<int>(config_error);
  }

  if (solve_cmd->parsed()) return cmd_solve(options, err);
  if (sim_cmd->parsed()) return cmd_simulate(options, err);
  if (ce_cmd->parsed()) return cmd_counterexample(options, err);
  return cmd_verify(options, err);
}

} // namespace reinsure::cli
