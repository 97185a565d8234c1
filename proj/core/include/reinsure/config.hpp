#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "reinsure/hjb.hpp"
#include "reinsure/model.hpp"
#include "reinsure/simulate.hpp"

namespace reinsure {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GridSettings {
  std::size_t n = 2000;
  std::size_t control_points = 101;
};

struct SolverSettings {
  double tol = 1e-8;
  double eval_tol = 1e-10;
  std::size_t max_iter = 500;
  JumpFormula jump_formula = JumpFormula::derived;
};

struct McSettings {
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  std::optional<double> t_max_override;
  unsigned threads = 1;
};

struct OutputSettings {
  std::string directory = "out";
};

/// Everything a run needs, parsed from one JSON document (comments allowed).
/// Unknown keys are rejected at every level; omitted keys keep the defaults
/// shown in the member initializers.
struct RunConfig {
  ModelInputs model;
  GridSettings grid;
  SolverSettings solver;
  McSettings mc;
  OutputSettings output;

  SolverConfig solver_config() const;
  McConfig mc_config() const;
};

/// Throws ConfigError on malformed JSON, unknown keys or wrong types.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

} // namespace reinsure
