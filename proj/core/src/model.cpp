#include "reinsure/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reinsure {

ClaimLaw::ClaimLaw(std::vector<ClaimAtom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty())
    throw std::invalid_argument("claim law needs at least one atom");
  double total = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& atom = atoms_[i];
    if (!(atom.size > 0.0) || !std::isfinite(atom.size))
      throw std::invalid_argument("claim sizes must be positive and finite");
    if (!(atom.prob > 0.0))
      throw std::invalid_argument("claim probabilities must be positive");
    if (i > 0 && !(atom.size > atoms_[i - 1].size))
      throw std::invalid_argument("claim sizes must be strictly increasing");
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("claim probabilities must sum to 1");
}

ClaimLaw ClaimLaw::dirac(double size) { return ClaimLaw({{size, 1.0}}); }

double ClaimLaw::mean() const noexcept {
  double m = 0.0;
  for (const auto& atom : atoms_) m += atom.prob * atom.size;
  return m;
}

double ClaimLaw::mean_excess(double u) const noexcept {
  double m = 0.0;
  for (const auto& atom : atoms_) m += atom.prob * std::max(atom.size - u, 0.0);
  return m;
}

double ClaimLaw::mean_limited(double u) const noexcept {
  double m = 0.0;
  for (const auto& atom : atoms_) m += atom.prob * std::min(atom.size, u);
  return m;
}

std::size_t ClaimLaw::select(double uniform) const noexcept {
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
    cumulative += atoms_[i].prob;
    if (uniform < cumulative) return i;
  }
  return atoms_.size() - 1;
}

namespace {

// p(u) - beta E[f(1, Y ^ u)] divided by beta * rho; nondecreasing in u.
double coverage_margin(const ModelInputs& in, double u) {
  return in.k1 * in.claims.mean() - in.k2 * in.claims.mean_excess(u);
}

} // namespace

double min_retention(const ModelInputs& inputs, double* raw_root) {
  const double mean = inputs.claims.mean();
  if (coverage_margin(inputs, 0.0) >= 0.0) {
    // Below the smallest atom the margin is affine: k1 m - k2 (m - u).
    if (raw_root)
      *raw_root = inputs.k2 != 0.0 ? (inputs.k2 - inputs.k1) * mean / inputs.k2 : 0.0;
    return 0.0;
  }
  double lo = 0.0;
  double hi = inputs.claims.max_size();
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (coverage_margin(inputs, mid) >= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  if (raw_root) *raw_root = hi;
  return hi;
}

ModelParams::ModelParams(ModelInputs inputs) : in_(std::move(inputs)) {
  if (!(in_.k1 >= 0.0)) throw std::invalid_argument("k1 must be nonnegative");
  if (!(in_.k2 > -1.0)) throw std::invalid_argument("k2 must exceed -1");
  if (!(in_.beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
  if (!(in_.zeta0 > 0.0)) throw std::invalid_argument("zeta0 must be positive");
  if (!(in_.r > 0.0)) throw std::invalid_argument("r must be positive");
  if (!(in_.rho > 0.0 && in_.rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");

  nu_ = in_.rho * in_.claims.mean();
  a_ = 1.0 / (in_.zeta0 * nu_);
  u_min_ = min_retention(in_, &u_min_raw_);
}

double ModelParams::jump_fraction(double claim_size, double u) const noexcept {
  return a_ * in_.rho * std::min(claim_size, u);
}

double premium_rate(const ModelParams& params, double u) {
  // The bisection root is accurate to a few ulps; accept that slack.
  if (u < params.u_min() - 1e-12 * std::max(1.0, params.u_min())) {
    std::ostringstream msg;
    msg << "retention " << u << " is below the minimal retention " << params.u_min();
    throw InadmissibleRetention(msg.str());
  }
  const double beta = params.beta();
  return (1.0 + params.k1()) * beta * params.nu() -
         (1.0 + params.k2()) * beta * params.rho() * params.claims().mean_excess(u);
}

double solvency_coefficient(const ModelParams& params) { return params.a(); }

AssumptionReport validate_assumptions(const ModelParams& params) {
  AssumptionReport report;
  // f(x, y) = rho x y is linear (hence convex) and nondecreasing in x,
  // increasing in y, and vanishes on the axes: A1 holds for rho in (0, 1].
  report.a1_ok = params.rho() > 0.0 && params.rho() <= 1.0;
  report.a2_threshold = 2.0 * params.growth_bound();
  report.a2_ok = params.r() > report.a2_threshold;
  report.lipschitz_scale = params.a() * params.lipschitz_constant();
  report.lipschitz_scale_ok = report.lipschitz_scale <= 1.0;

  std::ostringstream msg;
  if (!report.a2_ok) {
    msg << "A2 violated: r = " << params.r() << " must exceed 2(1+k1)beta/zeta0 = "
        << report.a2_threshold;
    report.messages.push_back(msg.str());
    msg.str({});
  }
  if (!report.lipschitz_scale_ok) {
    msg << "a * rho * max claim = " << report.lipschitz_scale
        << " exceeds 1; claims at full retention ruin the insurer";
    report.messages.push_back(msg.str());
    msg.str({});
  }
  if (!params.loadings_ordered()) {
    msg << "k1 = " << params.k1() << " >= k2 = " << params.k2()
        << "; reinsurance is cheaper than the direct premium loading";
    report.messages.push_back(msg.str());
  }
  return report;
}

} // namespace reinsure
