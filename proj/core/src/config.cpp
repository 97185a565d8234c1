#include "reinsure/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace reinsure {

using nlohmann::json;

namespace {

void reject_unknown(const json& object, std::string_view where,
                    std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& item : object.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
  }
}

template <class T>
void read(const json& object, const char* key, T& target, std::string_view where) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

ModelInputs parse_model(const json& node) {
  reject_unknown(node, "model", {"k1", "k2", "beta", "zeta0", "r", "rho", "claims"});
  ModelInputs model;
  read(node, "k1", model.k1, "model");
  read(node, "k2", model.k2, "model");
  read(node, "beta", model.beta, "model");
  read(node, "zeta0", model.zeta0, "model");
  read(node, "r", model.r, "model");
  read(node, "rho", model.rho, "model");
  if (node.contains("claims")) {
    const auto& claims = node.at("claims");
    if (!claims.is_array()) throw ConfigError("model.claims must be an array");
    std::vector<ClaimAtom> atoms;
    for (const auto& atom : claims) {
      reject_unknown(atom, "model.claims[]", {"y", "prob"});
      if (!atom.contains("y") || !atom.contains("prob"))
        throw ConfigError("model.claims[] entries need both 'y' and 'prob'");
      ClaimAtom a{};
      read(atom, "y", a.size, "model.claims[]");
      read(atom, "prob", a.prob, "model.claims[]");
      atoms.push_back(a);
    }
    try {
      model.claims = ClaimLaw(std::move(atoms));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model.claims: ") + e.what());
    }
  }
  return model;
}

} // namespace

SolverConfig RunConfig::solver_config() const {
  SolverConfig cfg;
  cfg.grid_n = grid.n;
  cfg.control_points = grid.control_points;
  cfg.tol = solver.tol;
  cfg.eval_tol = solver.eval_tol;
  cfg.max_iter = solver.max_iter;
  cfg.jump_formula = solver.jump_formula;
  return cfg;
}

McConfig RunConfig::mc_config() const {
  McConfig cfg;
  cfg.paths = mc.paths;
  cfg.seed = mc.seed;
  cfg.horizon = mc.t_max_override.value_or(0.0);
  cfg.threads = mc.threads;
  return cfg;
}

RunConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  reject_unknown(root, "config", {"model", "grid", "solver", "mc", "output"});

  RunConfig cfg;
  if (root.contains("model")) cfg.model = parse_model(root.at("model"));
  if (root.contains("grid")) {
    const auto& node = root.at("grid");
    reject_unknown(node, "grid", {"n", "control_points"});
    read(node, "n", cfg.grid.n, "grid");
    read(node, "control_points", cfg.grid.control_points, "grid");
  }
  if (root.contains("solver")) {
    const auto& node = root.at("solver");
    reject_unknown(node, "solver", {"tol", "eval_tol", "max_iter", "jump_formula"});
    read(node, "tol", cfg.solver.tol, "solver");
    read(node, "eval_tol", cfg.solver.eval_tol, "solver");
    read(node, "max_iter", cfg.solver.max_iter, "solver");
    if (node.contains("jump_formula")) {
      std::string name;
      read(node, "jump_formula", name, "solver");
      try {
        cfg.solver.jump_formula = parse_jump_formula(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("solver.jump_formula: ") + e.what());
      }
    }
  }
  if (root.contains("mc")) {
    const auto& node = root.at("mc");
    reject_unknown(node, "mc", {"paths", "seed", "t_max_override", "threads"});
    read(node, "paths", cfg.mc.paths, "mc");
    read(node, "seed", cfg.mc.seed, "mc");
    read(node, "threads", cfg.mc.threads, "mc");
    if (node.contains("t_max_override") && !node.at("t_max_override").is_null()) {
      double t = 0.0;
      read(node, "t_max_override", t, "mc");
      cfg.mc.t_max_override = t;
    }
  }
  if (root.contains("output")) {
    const auto& node = root.at("output");
    reject_unknown(node, "output", {"directory"});
    read(node, "directory", cfg.output.directory, "output");
  }

  if (cfg.grid.n < 3) throw ConfigError("grid.n must be at least 3");
  if (cfg.grid.control_points < 1) throw ConfigError("grid.control_points must be positive");
  if (cfg.mc.paths < 2) throw ConfigError("mc.paths must be at least 2");
  if (!(cfg.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

} // namespace reinsure
