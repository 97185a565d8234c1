#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "reinsure/config.hpp"

namespace reinsure::cli {

enum ExitCode : int {
  ok = 0,
  infrastructure = 1,
  config_error = 2,
  assumption_violation = 3,
  non_convergence = 4,
  verification_failure = 5,
};

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::vector<double> x0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_n;
  std::optional<std::string> jump_formula;

  // simulate
  std::optional<std::filesystem::path> policy_csv;
  std::optional<double> retention;
  std::optional<double> barrier;
  std::size_t dump_paths = 0;

  // verify
  std::optional<std::filesystem::path> grid_csv;
};

/// Loads the config (defaults when none is given) and applies flag overrides.
/// Throws ConfigError.
RunConfig resolve_config(const Options& options);

std::filesystem::path output_directory(const RunConfig& config, const Options& options);

int cmd_solve(const Options& options, std::ostream& log);
int cmd_simulate(const Options& options, std::ostream& log);
int cmd_counterexample(const Options& options, std::ostream& log);
int cmd_verify(const Options& options, std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace reinsure::cli
