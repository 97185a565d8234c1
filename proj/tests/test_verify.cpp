#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "reinsure/verify.hpp"

using namespace reinsure;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

ModelParams params_with(double zeta0 = 0.04, double beta = 0.0011, double k2 = 0.25) {
  ModelInputs in;
  in.zeta0 = zeta0;
  in.beta = beta;
  in.k2 = k2;
  return ModelParams(in);
}

ValueGrid identity_grid(std::size_t n) {
  ValueGrid v{Grid(n)};
  for (std::size_t j = 0; j < n; ++j) {
    v.psi[j] = v.grid.x(j);
    v.u_star[j] = 1.0;
    v.dividend_flag[j] = j > 0;
  }
  return v;
}

const PropertyReport& find(const std::vector<PropertyReport>& reports, const std::string& name) {
  const auto it = std::find_if(reports.begin(), reports.end(),
                               [&](const auto& r) { return r.name == name; });
  REQUIRE(it != reports.end());
  return *it;
}

SolverConfig waived(std::size_t n, std::size_t controls) {
  SolverConfig cfg;
  cfg.grid_n = n;
  cfg.control_points = controls;
  cfg.require_assumptions = false;
  return cfg;
}

} // namespace

TEST_CASE("identity value passes the structure checks") {
  const auto reports = check_value_structure(identity_grid(200));
  REQUIRE(reports.size() == 5);
  for (const auto& r : reports) {
    INFO(r.name);
    CHECK(r.passed);
  }
  CHECK_THAT(find(reports, "ratio_nonincreasing").details, ContainsSubstring("= 1"));
}

TEST_CASE("structure checks catch broken values") {
  SECTION("decreasing step") {
    auto v = identity_grid(50);
    v.psi[20] = v.psi[19] - 0.01;
    const auto reports = check_value_structure(v);
    const auto& mono = find(reports, "monotone");
    CHECK_FALSE(mono.passed);
    CHECK(mono.location == "node 20");
  }
  SECTION("zero function violates the slope bound by one") {
    ValueGrid v{Grid(50)};
    const auto& slope = find(check_value_structure(v), "slope_at_least_one");
    CHECK_FALSE(slope.passed);
    CHECK_THAT(slope.worst_violation, WithinAbs(1.0, 1e-15));
  }
  SECTION("nonzero value at the origin") {
    auto v = identity_grid(50);
    v.psi[0] = 1e-9;
    CHECK_FALSE(find(check_value_structure(v), "value_at_zero").passed);
  }
  SECTION("increasing ratio") {
    auto v = identity_grid(50);
    for (std::size_t j = 0; j < 50; ++j) v.psi[j] = v.grid.x(j) * (1.0 + v.grid.x(j));
    CHECK_FALSE(find(check_value_structure(v), "ratio_nonincreasing").passed);
  }
}

TEST_CASE("VI residual of the identity on the figure parameters") {
  for (double k2 : {0.25, 0.19}) {
    const auto report = check_vi_residual(params_with(0.04, 0.0011, k2), identity_grid(400));
    CHECK(report.passed);
    CHECK(report.worst_violation <= 1e-12);
  }
}

TEST_CASE("VI residual localizes a perturbation") {
  auto v = identity_grid(400);
  v.psi[200] += 1e-3;
  const auto report = check_vi_residual(params_with(), v);
  CHECK_FALSE(report.passed);
  // The backward quotient at the next node drops by 1e-3 / (x_201 - x_200).
  CHECK(report.location == "node 201");
  const double dx = v.grid.x(201) - v.grid.x(200);
  CHECK_THAT(report.worst_violation, WithinAbs(1e-3 / dx, 1e-9));
}

TEST_CASE("VI residual of a nontrivial solve") {
  const auto p = params_with(0.02);
  const auto res = solve(p, waived(200, 21));
  REQUIRE(res.report.converged);
  ResidualConfig cfg;
  cfg.control_points = 21;
  const auto report = check_vi_residual(p, res.values, cfg);
  CHECK(report.passed);
  // V/x need not decrease here: the value is driven by the truncated top.
  const auto structure = check_value_structure(res.values);
  for (const char* name : {"value_at_zero", "monotone", "slope_at_least_one"}) {
    INFO(name);
    CHECK(find(structure, name).passed);
  }
}

TEST_CASE("value iteration agrees with policy iteration") {
  SECTION("figure parameters") {
    for (double k2 : {0.25, 0.19}) {
      SolverConfig cfg;
      cfg.grid_n = 40;
      cfg.control_points = 5;
      const auto report = check_dpp_oracle(params_with(0.04, 0.0011, k2), cfg);
      INFO(report.details);
      CHECK(report.passed);
    }
  }
  SECTION("truncated problems with a continuation region") {
    for (auto formula : {JumpFormula::derived, JumpFormula::printed}) {
      for (const auto& p : {params_with(0.02), params_with(2.0, 0.1)}) {
        auto cfg = waived(40, 5);
        cfg.jump_formula = formula;
        const auto report = check_dpp_oracle(p, cfg);
        INFO(report.details << " worst " << report.worst_violation);
        CHECK(report.passed);
      }
    }
  }
  SECTION("oracle refuses large problems") {
    CHECK_THROWS_AS(check_dpp_oracle(params_with(), waived(51, 5)), std::invalid_argument);
    CHECK_THROWS_AS(check_dpp_oracle(params_with(), waived(40, 6)), std::invalid_argument);
  }
}

TEST_CASE("value iteration on the figure parameters returns the reserve") {
  SolverConfig cfg;
  cfg.grid_n = 30;
  cfg.control_points = 5;
  const auto vi = value_iteration(params_with(), cfg);
  REQUIRE(vi.converged);
  const Grid g(30);
  for (std::size_t j = 0; j < 30; ++j) CHECK_THAT(vi.psi[j], WithinAbs(g.x(j), 1e-12));
}

TEST_CASE("audit library") {
  const auto p = params_with();
  const auto library = audit_library(p, FeedbackPolicy::constant(1.0, 2.0));
  REQUIRE(library.size() == 7);
  for (const auto& entry : library) {
    CHECK(entry.policy.retention(1.0) >= p.u_min());
    CHECK(entry.policy.retention(1.0) <= p.u_max());
  }
  CHECK(library[1].policy.barrier() == 4.0);
}

TEST_CASE("without the growth condition the discrete value follows the truncation") {
  // r = 0.07 lies between (1+k1) beta / zeta0 = 0.066 and twice that.  The
  // forward difference near the top node doubles the drift, so refinement
  // diverges instead of converging.
  const auto study = refinement_study(params_with(0.02), waived(0, 11), {50, 100, 200});
  REQUIRE(study.sup_diffs.size() == 3);
  REQUIRE(study.ratios.size() == 2);
  for (std::size_t i = 0; i + 1 < study.sup_diffs.size(); ++i)
    CHECK(study.sup_diffs[i + 1] > study.sup_diffs[i]);
}

TEST_CASE("refinement of the figure problem is exact") {
  SolverConfig cfg;
  const auto study = refinement_study(params_with(), cfg, {100, 200});
  for (double d : study.sup_diffs) CHECK(d <= 1e-12);
}

TEST_CASE("cross-validation") {
  const auto p = params_with();
  McConfig mc;
  mc.paths = 5000;
  SolverConfig cfg;
  cfg.grid_n = 400;
  const auto res = solve(p, cfg);
  const auto policy = extract_policy(res.values);
  SECTION("solved grid agrees with simulation") {
    const double c = estimate_grid_error_constant(p, cfg, {100, 200}, {1.0, 5.0, 9.0}, mc);
    const auto report = check_cross_validation(p, res.values, policy, {1.0, 5.0, 9.0}, mc, c);
    INFO(report.details);
    CHECK(report.passed);
  }
  SECTION("an understated value is caught by the audit") {
    auto low = res.values;
    for (auto& v : low.psi) v *= 0.5;
    const auto report = check_cross_validation(p, low, policy, {1.0}, mc, 0.0);
    CHECK_FALSE(report.passed);
  }
}

TEST_CASE("full suite on a reduced figure configuration") {
  SuiteConfig suite;
  suite.solver.grid_n = 400;
  suite.mc.paths = 5000;
  suite.pairs = 1000;
  const auto reports = run_suite(params_with(), suite);
  CHECK(reports.size() == 14);
  for (const auto& r : reports) {
    INFO(r.name << " worst " << r.worst_violation << " tol " << r.tolerance << " " << r.details);
    CHECK(r.passed);
  }
}

TEST_CASE("suite flags a corrupted grid") {
  auto v = identity_grid(400);
  v.psi[100] *= 1.01;
  SuiteConfig suite;
  suite.solver.grid_n = 400;
  suite.mc.paths = 2000;
  suite.pairs = 200;
  const auto reports = run_suite(params_with(), suite, &v);
  CHECK_FALSE(find(reports, "vi_residual").passed);
}
