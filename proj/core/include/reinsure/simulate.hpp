#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reinsure/hjb.hpp"
#include "reinsure/model.hpp"
#include "reinsure/rng.hpp"

namespace reinsure {

/// A dividend payment.  duration == 0 is a lump sum paid at `time`; otherwise
/// `amount` is paid at a constant rate over [time, time + duration].
struct Dividend {
  double time = 0.0;
  double amount = 0.0;
  double duration = 0.0;
};

/// Present value of one dividend at discount rate r.
double discounted_value(const Dividend& dividend, double r);

enum class EventKind { growth, claim, dividend, ruin };
std::string to_string(EventKind kind);

struct PathEvent {
  double time = 0.0;
  EventKind kind = EventKind::growth;
  double reserve_after = 0.0;
  double amount = 0.0;
};

/// One simulated reserve trajectory.
struct PathRecord {
  std::vector<double> jump_times;
  std::vector<double> reserves_pre_jump;
  std::vector<Dividend> dividends;
  double ruin_time = std::numeric_limits<double>::infinity();
  double discounted_dividends = 0.0;
  double end_time = 0.0;
  double final_reserve = 0.0;
  /// max over event times of X_t / (x0 exp(C0 t)), C0 = (1+k1) beta / zeta0.
  double growth_ratio = 0.0;
  std::vector<PathEvent> events;

  bool ruined() const noexcept { return ruin_time < std::numeric_limits<double>::infinity(); }
};

/// State-independent strategy: constant retention and a scripted cumulative
/// dividend process made of lump sums (time, amount), each multiplied by
/// `scale`.  A lump larger than the reserve pays the reserve and ruins.
struct ScriptedStrategy {
  double retention = 1.0;
  std::vector<std::pair<double, double>> lumps;
  double scale = 1.0;
};

/// Truncation horizon ln(1e6) / r.
double default_horizon(const ModelParams& params);

/// Exact event-driven simulation under a feedback policy.  Between claims the
/// reserve grows as X e^{a p(u) t}; above the barrier the excess is paid at
/// once and at the barrier the drift is paid out as a dividend flow.
/// Throws InadmissibleRetention when the policy leaves [u_min, u_max].
PathRecord simulate_path(const ModelParams& params, const FeedbackPolicy& policy, double x0,
                         double horizon, CounterRng& rng);

/// Exact simulation under a scripted strategy.  Emits one `growth` event
/// with the pre-event reserve at every claim or lump time, followed by the
/// claim or dividend event itself.
PathRecord simulate_path(const ModelParams& params, const ScriptedStrategy& strategy, double x0,
                         double horizon, CounterRng& rng);

struct McConfig {
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  double horizon = 0.0; // <= 0 selects default_horizon()
  unsigned threads = 1;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

/// Sample mean and standard error, summed in index order.
McEstimate summarize(std::span<const double> samples, std::uint64_t seed);

/// Mean discounted dividends over independent paths; path k draws from
/// CounterRng(seed, k).  The result does not depend on `threads`.
McEstimate estimate_value(const ModelParams& params, const FeedbackPolicy& policy, double x0,
                          const McConfig& config);

struct CounterexampleConfig {
  double r = 0.07;
  double k1 = 0.2;
  double k2 = 0.25;
  double x0 = 1e-6;
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
};

struct CounterexampleResult {
  McEstimate dividend;   // discounted dividend of the one-shot strategy
  McEstimate survival;   // indicator of no claim before t = 1
  double analytic = 0.0; // e^{-(r+1)}
  double survival_analytic = 0.0; // e^{-1}
};

/// Single-contract collective model with unit claims at Poisson rate 1 and
/// full retention; pays a dividend of 1 at t = 1 when no claim arrived.
CounterexampleResult counterexample_collective(const CounterexampleConfig& config);

struct PairedResult {
  std::size_t pairs = 0;
  std::size_t violations = 0;  // pairs with at least one ordering violation
  std::size_t comparisons = 0; // event-time comparisons performed
  double worst = 0.0;          // largest violation magnitude
  std::size_t worst_pair = 0;
};

/// Pathwise ordering check: with shared claims and the same scripted
/// strategy, X^{x0}_t <= X^{x0'}_t at every event time (tolerance 0).
PairedResult paired_paths(const ModelParams& params, const ScriptedStrategy& strategy, double x0,
                          double x0_prime, std::size_t pairs, std::uint64_t seed, double horizon);

/// Scaling check: lambda = x / (x + x'); compares lambda X^{x+x', L} with
/// X^{x, lambda L} at every event time and counts pairs where the scaled
/// larger path exceeds the smaller one by more than rel_tol.
PairedResult scaled_paths(const ModelParams& params, const ScriptedStrategy& strategy, double x,
                          double x_prime, std::size_t pairs, std::uint64_t seed, double horizon,
                          double rel_tol = 1e-12);

} // namespace reinsure
