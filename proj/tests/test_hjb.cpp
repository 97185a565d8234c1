#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "reinsure/hjb.hpp"

using namespace reinsure;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelParams with(double k2, double zeta0 = 0.04, double beta = 0.0011, double r = 0.07) {
  ModelInputs in;
  in.k2 = k2;
  in.zeta0 = zeta0;
  in.beta = beta;
  in.r = r;
  return ModelParams(in);
}

// Outside the growth condition the truncated problem has a genuine
// continuation region, which exercises the whole policy iteration.
SolverConfig truncated(std::size_t n) {
  SolverConfig cfg;
  cfg.grid_n = n;
  cfg.control_points = 21;
  cfg.require_assumptions = false;
  return cfg;
}

} // namespace

TEST_CASE("reserve transform") {
  CHECK(to_transformed(0.0) == 0.0);
  CHECK_THAT(to_transformed(1.0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(to_reserve(0.5), WithinAbs(1.0, 1e-15));
  CHECK_THAT(to_reserve(0.9), WithinRel(9.0, 1e-14));
  for (double x : {1e-9, 0.3, 7.0, 1e6}) CHECK_THAT(to_reserve(to_transformed(x)), WithinRel(x, 1e-9));
  CHECK_THROWS_AS(to_reserve(1.0), std::domain_error);
  CHECK_THROWS_AS(to_reserve(-0.1), std::domain_error);
  CHECK_THROWS_AS(to_transformed(-1.0), std::domain_error);
}

TEST_CASE("grid layout") {
  const Grid g(10);
  CHECK(g.size() == 10);
  CHECK(g.top() == 9);
  CHECK_THAT(g.h(), WithinAbs(0.1, 1e-16));
  CHECK_THAT(g.x(1), WithinRel(1.0 / 9.0, 1e-14));
  CHECK_THAT(g.x(9), WithinRel(9.0, 1e-13));
  CHECK_THROWS_AS(Grid(2), std::invalid_argument);
}

TEST_CASE("jump destinations") {
  // X -> 0.8 X from x = 1 lands on x = 0.8, i.e. y = 4/9.
  CHECK_THAT(jump_destination(0.5, 0.2, JumpFormula::derived), WithinAbs(0.4 / 0.9, 1e-15));
  CHECK_THAT(jump_destination(0.5, 0.2, JumpFormula::printed), WithinAbs(0.2 / 0.9, 1e-15));
  CHECK(jump_destination(0.5, 1.0, JumpFormula::derived) <= 0.0);
  CHECK(jump_destination(0.5, 25.0, JumpFormula::derived) <= 0.0);
  CHECK(jump_destination(0.3, 0.5, JumpFormula::printed) <= 0.0);
  CHECK(jump_destination(0.5, 0.0, JumpFormula::derived) == 0.5);
  CHECK(parse_jump_formula("printed") == JumpFormula::printed);
  CHECK(to_string(JumpFormula::derived) == "derived");
  CHECK_THROWS_AS(parse_jump_formula("exact"), std::invalid_argument);
}

TEST_CASE("interpolation on the grid") {
  const Grid g(10);
  std::vector<double> psi(10);
  for (std::size_t j = 0; j < 10; ++j) psi[j] = g.y(j) * g.y(j);
  CHECK_THAT(interpolate(g, psi, 0.25), WithinAbs(0.5 * (0.04 + 0.09), 1e-15));
  CHECK(interpolate(g, psi, 0.0) == 0.0);
  CHECK(interpolate(g, psi, -0.3) == 0.0);
  CHECK_THAT(interpolate(g, psi, 0.3), WithinAbs(0.09, 1e-15));
  // Above the top node: unit slope in x.
  CHECK_THAT(interpolate(g, psi, 0.95), WithinAbs(0.81 + (19.0 - 9.0), 1e-12));
}

TEST_CASE("discrete Hamiltonian by hand") {
  // zeta0 = 2 makes a = 5, so c = 0.5 at u = 1: claims do not ruin.
  const auto p = with(0.25, 2.0);
  const Grid g(10);
  std::vector<double> psi(10);
  for (std::size_t j = 0; j < 10; ++j) psi[j] = g.y(j) * g.y(j);
  CHECK_THAT(discrete_hamiltonian(p, g, psi, 3, 1.0, JumpFormula::derived),
             WithinRel(-0.006265744705882356, 1e-12));
  CHECK_THAT(discrete_hamiltonian(p, g, psi, 3, 1.0, JumpFormula::printed),
             WithinRel(-0.006301980000000003, 1e-12));
  CHECK_THAT(discrete_hamiltonian(p, g, psi, 3, 0.5, JumpFormula::derived),
             WithinRel(-0.006284727466216219, 1e-12));
  CHECK_THAT(discrete_hamiltonian(p, g, psi, 3, 0.5, JumpFormula::printed),
             WithinRel(-0.006352511250000002, 1e-12));
  CHECK_THAT(obstacle_residual(g, psi, 3), WithinAbs(0.72, 1e-14));
  CHECK_THROWS_AS(discrete_hamiltonian(p, g, psi, 0, 1.0), std::out_of_range);
}

TEST_CASE("Hamiltonian of the zero function vanishes") {
  const auto p = with(0.25);
  const Grid g(20);
  const std::vector<double> zero(20, 0.0);
  for (std::size_t j = 1; j < 19; ++j)
    for (double u : control_levels(p, 5)) CHECK(discrete_hamiltonian(p, g, zero, j, u) == 0.0);
}

TEST_CASE("control levels span the admissible retentions") {
  const auto levels = control_levels(with(0.25), 101);
  REQUIRE(levels.size() == 101);
  CHECK_THAT(levels.front(), WithinAbs(0.2, 1e-10));
  CHECK(levels.back() == 1.0);
  CHECK_THAT(levels[1] - levels[0], WithinAbs(0.008, 1e-10));
  CHECK(control_levels(with(0.19), 101).front() == 0.0);
  CHECK(control_levels(with(0.25), 1) == std::vector<double>{1.0});
}

TEST_CASE("figure parameters: value equals the reserve") {
  for (double k2 : {0.25, 0.19}) {
    SolverConfig cfg;
    cfg.grid_n = 500;
    const auto res = solve(with(k2), cfg);
    CHECK(res.report.converged);
    CHECK(res.report.m_matrix_ok);
    CHECK(res.report.sup_residual <= cfg.tol);
    double worst = 0.0;
    for (std::size_t j = 0; j < 500; ++j)
      worst = std::max(worst, std::abs(res.values.psi[j] - res.values.grid.x(j)));
    CHECK(worst <= 1e-12);
    // The upward drift a p(u) never outruns discounting, and a full claim
    // at retention 1 ruins, yet u = 1 still maximizes G: the retained
    // premium outweighs the ruin penalty beta * x.
    for (std::size_t j = 0; j < 500; ++j) CHECK(res.values.u_star[j] == 1.0);
    for (std::size_t j = 1; j < 500; ++j) CHECK(res.values.dividend_flag[j]);
  }
}

TEST_CASE("growth condition is enforced unless waived") {
  const auto p = with(0.25, 0.04, 0.0011, 0.05);
  CHECK_THROWS_AS(solve(p), AssumptionViolation);
  SolverConfig cfg = truncated(50);
  CHECK_NOTHROW(solve(p, cfg));
}

TEST_CASE("no claims: pay everything at once") {
  SolverConfig cfg;
  cfg.grid_n = 200;
  const auto res = solve(with(0.25, 0.04, 0.0), cfg);
  CHECK(res.report.converged);
  for (std::size_t j = 0; j < 200; ++j)
    CHECK_THAT(res.values.psi[j], WithinAbs(res.values.grid.x(j), 1e-12));
}

TEST_CASE("truncated problem has a continuation region") {
  const auto p = with(0.25, 0.02);
  const auto res = solve(p, truncated(200));
  REQUIRE(res.report.converged);
  CHECK(res.report.m_matrix_ok);
  CHECK(res.report.iterations > 1);
  const auto& v = res.values;
  CHECK(v.psi[0] == 0.0);
  std::size_t continuation = 0;
  for (std::size_t j = 1; j < v.grid.size(); ++j) {
    CHECK(v.psi[j] >= v.grid.x(j) - 1e-12);
    CHECK(v.psi[j] >= v.psi[j - 1]);
    if (!v.dividend_flag[j]) ++continuation;
  }
  CHECK(continuation > 0);
  CHECK(v.dividend_flag[v.grid.top()]);
}

TEST_CASE("jump formulas give different solutions on the truncated problem") {
  // a = 5 keeps c = a rho (y ^ u) below 1, so claims land inside the grid.
  const auto p = with(0.25, 2.0, 0.1);
  auto cfg = truncated(100);
  const auto derived = solve(p, cfg);
  cfg.jump_formula = JumpFormula::printed;
  const auto printed = solve(p, cfg);
  REQUIRE(derived.report.converged);
  REQUIRE(printed.report.converged);
  double diff = 0.0;
  for (std::size_t j = 0; j < 100; ++j)
    diff = std::max(diff, std::abs(derived.values.psi[j] - printed.values.psi[j]));
  CHECK(diff > 0.0);
}

TEST_CASE("policy extraction") {
  SECTION("every positive node pays: barrier at the first node") {
    SolverConfig cfg;
    cfg.grid_n = 100;
    const auto res = solve(with(0.25), cfg);
    const auto policy = extract_policy(res.values);
    CHECK_THAT(policy.barrier(), WithinRel(res.values.grid.x(1), 1e-15));
    CHECK(policy.single_dividend_region());
    CHECK(policy.warnings().empty());
    CHECK(policy.retention(3.0) == 1.0);
  }
  SECTION("no flagged node: infinite barrier with a warning") {
    ValueGrid v{Grid(10)};
    std::fill(v.u_star.begin(), v.u_star.end(), 0.5);
    const auto policy = extract_policy(v);
    CHECK(std::isinf(policy.barrier()));
    CHECK(policy.warnings().size() == 1);
  }
  SECTION("two dividend intervals are reported") {
    ValueGrid v{Grid(10)};
    std::fill(v.u_star.begin(), v.u_star.end(), 0.5);
    v.dividend_flag[3] = true;
    for (std::size_t j = 7; j < 10; ++j) v.dividend_flag[j] = true;
    const auto policy = extract_policy(v);
    CHECK_THAT(policy.barrier(), WithinRel(v.grid.x(3), 1e-15));
    CHECK_FALSE(policy.single_dividend_region());
    CHECK_FALSE(policy.warnings().empty());
  }
  SECTION("retention by nearest node") {
    ValueGrid v{Grid(10)};
    for (std::size_t j = 0; j < 10; ++j) v.u_star[j] = 0.1 * static_cast<double>(j);
    v.dividend_flag[9] = true;
    const auto policy = extract_policy(v);
    CHECK_THAT(policy.retention(v.grid.x(4)), WithinAbs(0.4, 1e-15));
    CHECK_THAT(policy.retention(100.0), WithinAbs(0.9, 1e-15));
  }
}

TEST_CASE("constant policy") {
  const auto policy = FeedbackPolicy::constant(0.3, 2.5);
  CHECK(policy.retention(0.0) == 0.3);
  CHECK(policy.retention(1e9) == 0.3);
  CHECK(policy.barrier() == 2.5);
}

TEST_CASE("figure solve at full size meets the runtime target") {
  SolverConfig cfg;
  const auto res = solve(with(0.25), cfg);
  CHECK(res.report.converged);
  CHECK(res.report.seconds < 60.0);
}
