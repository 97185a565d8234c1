#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace reinsure {

/// One point mass of the claim-size law: size y > 0 with probability p.
struct ClaimAtom {
  double size;
  double prob;
};

/// Finite discrete claim-size distribution G.  The claim measure is
/// beta * G, so every atom is a claim size that occurs at rate beta * prob.
class ClaimLaw {
public:
  /// Throws std::invalid_argument unless sizes are positive and strictly
  /// increasing and the probabilities are positive and sum to one (1e-12).
  explicit ClaimLaw(std::vector<ClaimAtom> atoms);

  static ClaimLaw dirac(double size);

  std::span<const ClaimAtom> atoms() const noexcept { return atoms_; }
  double mean() const noexcept;
  double max_size() const noexcept { return atoms_.back().size; }

  /// E[(Y - u)^+]
  double mean_excess(double u) const noexcept;
  /// E[Y ^ u]
  double mean_limited(double u) const noexcept;

  /// Index of the atom selected by a uniform draw in (0,1), inverse CDF.
  std::size_t select(double uniform) const noexcept;

private:
  std::vector<ClaimAtom> atoms_;
};

/// Raw model constants as they appear in a configuration file.
struct ModelInputs {
  double k1 = 0.2;     // insurer safety loading
  double k2 = 0.25;    // reinsurer safety loading
  double beta = 0.0011;
  double zeta0 = 0.04; // solvency factor
  double r = 0.07;     // discount rate
  double rho = 0.1;    // exposed fraction of contracts
  ClaimLaw claims = ClaimLaw::dirac(1.0);
};

/// Validated model with the derived constants nu, a and the minimal
/// retention. Claims follow f(x, y) = rho * x * y.  Immutable.
class ModelParams {
public:
  /// Throws std::invalid_argument for k1 < 0, beta < 0, zeta0 <= 0, r <= 0
  /// or rho outside (0, 1].
  explicit ModelParams(ModelInputs inputs);

  const ModelInputs& inputs() const noexcept { return in_; }
  double k1() const noexcept { return in_.k1; }
  double k2() const noexcept { return in_.k2; }
  double beta() const noexcept { return in_.beta; }
  double zeta0() const noexcept { return in_.zeta0; }
  double r() const noexcept { return in_.r; }
  double rho() const noexcept { return in_.rho; }
  const ClaimLaw& claims() const noexcept { return in_.claims; }

  /// nu = E[f(1, Y)]
  double nu() const noexcept { return nu_; }
  /// a = 1 / (zeta0 * nu); the contract count at reserve x is a * x.
  double a() const noexcept { return a_; }
  /// Minimal admissible retention, clamped at zero.
  double u_min() const noexcept { return u_min_; }
  /// Unclamped root of the expenditure-coverage condition (may be negative).
  double u_min_raw() const noexcept { return u_min_raw_; }
  /// Largest meaningful retention: the largest claim atom.
  double u_max() const noexcept { return in_.claims.max_size(); }
  bool loadings_ordered() const noexcept { return in_.k1 < in_.k2; }
  /// Lipschitz constant of f in x: rho * max atom.
  double lipschitz_constant() const noexcept { return in_.rho * u_max(); }
  /// Bound on the reserve growth rate a * p(u) over admissible u.
  double growth_bound() const noexcept { return (1.0 + in_.k1) * in_.beta / in_.zeta0; }

  /// Relative jump size c = a * rho * (y ^ u) caused by a claim of size y
  /// under retention u; the reserve X becomes X * (1 - c).
  double jump_fraction(double claim_size, double u) const noexcept;

private:
  ModelInputs in_;
  double nu_ = 0.0;
  double a_ = 0.0;
  double u_min_ = 0.0;
  double u_min_raw_ = 0.0;
};

/// Thrown for a retention level below the minimal admissible retention.
class InadmissibleRetention : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Premium rate per unit of contracts, (1+k1) beta nu - (1+k2) beta E[f(1,(Y-u)^+)].
/// Throws InadmissibleRetention when u < u_min.
double premium_rate(const ModelParams& params, double u);

/// Smallest u >= 0 with p(u) >= beta * E[f(1, Y ^ u)].  Returns the clamped
/// value; the unclamped root is written to *raw_root when given.
double min_retention(const ModelInputs& inputs, double* raw_root = nullptr);

double solvency_coefficient(const ModelParams& params);

struct AssumptionReport {
  bool a1_ok = true;
  bool a2_ok = false;
  bool lipschitz_scale_ok = false;
  double a2_threshold = 0.0; // 2 (1+k1) beta / zeta0
  double lipschitz_scale = 0.0; // a * rho * max atom
  std::vector<std::string> messages;
};

AssumptionReport validate_assumptions(const ModelParams& params);

} // namespace reinsure
