#include "reinsure/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace reinsure {

double discounted_value(const Dividend& dividend, double r) {
  const double start = std::exp(-r * dividend.time);
  if (dividend.duration <= 0.0) return start * dividend.amount;
  const double rate = dividend.amount / dividend.duration;
  return rate * start * (-std::expm1(-r * dividend.duration)) / r;
}

std::string to_string(EventKind kind) {
  switch (kind) {
  case EventKind::growth: return "growth";
  case EventKind::claim: return "claim";
  case EventKind::dividend: return "dividend";
  case EventKind::ruin: return "ruin";
  }
  return "unknown";
}

double default_horizon(const ModelParams& params) { return std::log(1e6) / params.r(); }

namespace {

class PathBuilder {
public:
  PathBuilder(const ModelParams& params, double x0) : params_(params), x0_(x0) {}

  PathRecord& record() { return rec_; }

  void growth(double t, double reserve) {
    rec_.events.push_back({t, EventKind::growth, reserve, 0.0});
    if (x0_ > 0.0)
      rec_.growth_ratio =
          std::max(rec_.growth_ratio, reserve / (x0_ * std::exp(params_.growth_bound() * t)));
  }

  void lump(double t, double amount, double reserve_after) {
    Dividend d{t, amount, 0.0};
    rec_.discounted_dividends += discounted_value(d, params_.r());
    rec_.dividends.push_back(d);
    rec_.events.push_back({t, EventKind::dividend, reserve_after, amount});
  }

  void flow(double t, double amount, double duration, double reserve) {
    Dividend d{t, amount, duration};
    rec_.discounted_dividends += discounted_value(d, params_.r());
    rec_.dividends.push_back(d);
    rec_.events.push_back({t, EventKind::dividend, reserve, amount});
  }

  void claim(double t, double before, double after) {
    rec_.jump_times.push_back(t);
    rec_.reserves_pre_jump.push_back(before);
    rec_.events.push_back({t, EventKind::claim, after, before - after});
  }

  void ruin(double t) {
    rec_.ruin_time = t;
    rec_.events.push_back({t, EventKind::ruin, 0.0, 0.0});
  }

  void finish(double t, double reserve) {
    rec_.end_time = t;
    rec_.final_reserve = reserve;
  }

private:
  const ModelParams& params_;
  double x0_;
  PathRecord rec_;
};

double checked_growth_rate(const ModelParams& params, double u) {
  if (u > params.u_max() * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "retention " << u << " exceeds the largest claim " << params.u_max();
    throw InadmissibleRetention(msg.str());
  }
  return params.a() * premium_rate(params, u);
}

// Post-claim reserve; X (1 - c) keeps the map monotone in X under rounding.
double after_claim(double reserve, double c) { return c >= 1.0 ? 0.0 : reserve * (1.0 - c); }

} // namespace

PathRecord simulate_path(const ModelParams& params, const FeedbackPolicy& policy, double x0,
                         double horizon, CounterRng& rng) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("initial reserve must be nonnegative");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  PathBuilder path(params, x0);
  double t = 0.0;
  double x = x0;
  const double barrier = policy.barrier();

  if (x <= 0.0) {
    path.ruin(0.0);
    path.finish(0.0, 0.0);
    return std::move(path.record());
  }
  if (x > barrier) {
    path.lump(0.0, x - barrier, barrier);
    x = barrier;
    if (x <= 0.0) {
      path.ruin(0.0);
      path.finish(0.0, 0.0);
      return std::move(path.record());
    }
  }

  bool at_barrier = x >= barrier;
  double next_claim = rng.exponential(params.beta());
  while (true) {
    const double u = policy.retention(x);
    const double g = checked_growth_rate(params, u);
    const double segment_end = std::min(next_claim, horizon);

    if (at_barrier) {
      if (segment_end > t && g > 0.0) path.flow(t, g * barrier * (segment_end - t), segment_end - t, x);
      t = segment_end;
    } else {
      const double hit = (g > 0.0 && std::isfinite(barrier)) ? t + std::log(barrier / x) / g
                                                             : std::numeric_limits<double>::infinity();
      if (hit < segment_end) {
        x = barrier;
        t = hit;
        at_barrier = true;
        path.growth(t, x);
        continue; // re-evaluate the feedback at the barrier
      }
      x *= std::exp(g * (segment_end - t));
      t = segment_end;
    }
    path.growth(t, x);
    if (next_claim >= horizon) break;

    const auto& atom = params.claims().atoms()[params.claims().select(rng.uniform())];
    const double before = x;
    x = after_claim(x, params.jump_fraction(atom.size, u));
    path.claim(t, before, x);
    if (x <= 0.0) {
      x = 0.0;
      path.ruin(t);
      break;
    }
    at_barrier = x >= barrier;
    next_claim = t + rng.exponential(params.beta());
  }
  path.finish(t, x);
  return std::move(path.record());
}

PathRecord simulate_path(const ModelParams& params, const ScriptedStrategy& strategy, double x0,
                         double horizon, CounterRng& rng) {
  if (!(x0 >= 0.0)) throw std::invalid_argument("initial reserve must be nonnegative");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  PathBuilder path(params, x0);
  const double u = strategy.retention;
  const double g = checked_growth_rate(params, u);

  auto lumps = strategy.lumps;
  std::stable_sort(lumps.begin(), lumps.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });

  double t = 0.0;
  double x = x0;
  if (x <= 0.0) {
    path.ruin(0.0);
    path.finish(0.0, 0.0);
    return std::move(path.record());
  }

  std::size_t next_lump = 0;
  double next_claim = rng.exponential(params.beta());
  while (true) {
    const double lump_time = next_lump < lumps.size() ? lumps[next_lump].first
                                                      : std::numeric_limits<double>::infinity();
    const double event_time = std::min(next_claim, lump_time);
    if (event_time > horizon) {
      x *= std::exp(g * (horizon - t));
      t = horizon;
      break;
    }
    x *= std::exp(g * (event_time - t));
    t = event_time;
    path.growth(t, x);

    if (lump_time <= next_claim) {
      const double amount = strategy.scale * lumps[next_lump].second;
      ++next_lump;
      if (amount >= x) {
        path.lump(t, x, 0.0);
        x = 0.0;
        path.ruin(t);
        break;
      }
      x -= amount;
      path.lump(t, amount, x);
      continue;
    }

    const auto& atom = params.claims().atoms()[params.claims().select(rng.uniform())];
    const double before = x;
    x = after_claim(x, params.jump_fraction(atom.size, u));
    path.claim(t, before, x);
    if (x <= 0.0) {
      x = 0.0;
      path.ruin(t);
      break;
    }
    next_claim = t + rng.exponential(params.beta());
  }
  path.finish(t, x);
  return std::move(path.record());
}

McEstimate summarize(std::span<const double> samples, std::uint64_t seed) {
  McEstimate est;
  est.paths = samples.size();
  est.seed = seed;
  if (samples.empty()) return est;
  double sum = 0.0;
  for (double s : samples) sum += s;
  est.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return est;
  double squares = 0.0;
  for (double s : samples) squares += (s - est.mean) * (s - est.mean);
  const double variance = squares / static_cast<double>(samples.size() - 1);
  est.std_error = std::sqrt(variance / static_cast<double>(samples.size()));
  return est;
}

McEstimate estimate_value(const ModelParams& params, const FeedbackPolicy& policy, double x0,
                          const McConfig& config) {
  if (config.paths < 2) throw std::invalid_argument("need at least two paths");
  const double horizon = config.horizon > 0.0 ? config.horizon : default_horizon(params);
  std::vector<double> samples(config.paths);

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      CounterRng rng(config.seed, k);
      samples[k] = simulate_path(params, policy, x0, horizon, rng).discounted_dividends;
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, 64u));
  if (threads == 1) {
    run(0, config.paths);
  } else {
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (config.paths + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = std::min(config.paths, w * chunk);
      const std::size_t end = std::min(config.paths, begin + chunk);
      workers.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& worker : workers) worker.join();
    for (auto& error : errors)
      if (error) std::rethrow_exception(error);
  }
  return summarize(samples, config.seed);
}

CounterexampleResult counterexample_collective(const CounterexampleConfig& config) {
  if (!(config.r > 0.0)) throw std::invalid_argument("r must be positive");
  if (config.paths < 2) throw std::invalid_argument("need at least two paths");
  std::vector<double> payout(config.paths);
  std::vector<double> survived(config.paths);
  // Full retention: premium k1 - k2 + (1 + k2) = 1 + k1 per unit time.
  const double premium = config.k1 - config.k2 + (1.0 + config.k2);
  const double discount = std::exp(-config.r);
  for (std::size_t k = 0; k < config.paths; ++k) {
    CounterRng rng(config.seed, k);
    const double first_claim = rng.exponential(1.0);
    if (first_claim > 1.0) {
      const double reserve = config.x0 + premium;
      payout[k] = discount * std::min(1.0, reserve);
      survived[k] = 1.0;
    }
  }
  CounterexampleResult result;
  result.dividend = summarize(payout, config.seed);
  result.survival = summarize(survived, config.seed);
  result.analytic = std::exp(-(config.r + 1.0));
  result.survival_analytic = std::exp(-1.0);
  return result;
}

namespace {

// Reserve after event i, or 0 once the path has stopped.
double reserve_at(const PathRecord& rec, std::size_t i) {
  return i < rec.events.size() ? rec.events[i].reserve_after : (rec.ruined() ? 0.0 : rec.final_reserve);
}

} // namespace

PairedResult paired_paths(const ModelParams& params, const ScriptedStrategy& strategy, double x0,
                          double x0_prime, std::size_t pairs, std::uint64_t seed, double horizon) {
  if (!(0.0 <= x0 && x0 <= x0_prime)) throw std::invalid_argument("need 0 <= x0 <= x0'");
  PairedResult out;
  out.pairs = pairs;
  for (std::size_t k = 0; k < pairs; ++k) {
    CounterRng rng_low(seed, k);
    CounterRng rng_high(seed, k);
    const auto low = simulate_path(params, strategy, x0, horizon, rng_low);
    const auto high = simulate_path(params, strategy, x0_prime, horizon, rng_high);
    bool violated = false;
    const std::size_t count = std::max(low.events.size(), high.events.size());
    for (std::size_t i = 0; i < count; ++i) {
      const double a = reserve_at(low, i);
      const double b = reserve_at(high, i);
      ++out.comparisons;
      if (a > b) {
        violated = true;
        if (a - b > out.worst) {
          out.worst = a - b;
          out.worst_pair = k;
        }
      }
    }
    if (violated) ++out.violations;
  }
  return out;
}

PairedResult scaled_paths(const ModelParams& params, const ScriptedStrategy& strategy, double x,
                          double x_prime, std::size_t pairs, std::uint64_t seed, double horizon,
                          double rel_tol) {
  if (!(x > 0.0 && x_prime >= 0.0)) throw std::invalid_argument("need x > 0 and x' >= 0");
  const double lambda = x / (x + x_prime);
  ScriptedStrategy scaled = strategy;
  scaled.scale = strategy.scale * lambda;

  PairedResult out;
  out.pairs = pairs;
  for (std::size_t k = 0; k < pairs; ++k) {
    CounterRng rng_big(seed, k);
    CounterRng rng_small(seed, k);
    const auto big = simulate_path(params, strategy, x + x_prime, horizon, rng_big);
    const auto small = simulate_path(params, scaled, x, horizon, rng_small);
    bool violated = false;
    const std::size_t count = std::max(big.events.size(), small.events.size());
    for (std::size_t i = 0; i < count; ++i) {
      const double a = lambda * reserve_at(big, i);
      const double b = reserve_at(small, i);
      ++out.comparisons;
      const double excess = a - b;
      if (excess > rel_tol * std::max({a, b, x})) {
        violated = true;
        if (excess > out.worst) {
          out.worst = excess;
          out.worst_pair = k;
        }
      }
    }
    if (violated) ++out.violations;
  }
  return out;
}

} // namespace reinsure
