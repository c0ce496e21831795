#pragma once

/// Restart-based simulated annealing over the rate simplex
/// { sum lambda_i = Lambda, 0 <= lambda_i < 1/t_s }.
///
/// Moves are pairwise mass transfers, which keep the simplex constraint exact
/// instead of relying on penalty terms.  The box keeps every rate a hair
/// below 1/t_s so the objectives stay finite; a chain that still produces a
/// non-finite value scores 0 and walks away from the boundary.  The whole
/// optimization is a deterministic function of (objective, d, Lambda, params,
/// config): restarts draw their generator from derive_stream_seed(seed, r),
/// so they can run in any order (or in parallel) with identical results.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "peereff/connection.hpp"
#include "peereff/multi_connection.hpp"
#include "peereff/random.hpp"

namespace peereff {

/// Full determinization of one annealing run.  The schedule constants are
/// tuned so the two-connection optimum matches an exhaustive grid search
/// with margin; everything is overridable.
struct AnnealConfig {
  double initial_temperature = 1.0;
  double cooling_factor = 0.999;  ///< temperature multiplier per step
  int steps_per_restart = 20000;
  int restarts = 50;
  double step_scale = 0.1;  ///< initial move magnitude as a fraction of 1/t_s
  std::uint64_t seed = 1;
};

inline void validate(const AnnealConfig& config) {
  if (!(config.initial_temperature > 0.0) || !(config.step_scale > 0.0) ||
      !(config.cooling_factor > 0.0 && config.cooling_factor < 1.0) ||
      config.steps_per_restart < 1 || config.restarts < 1) {
    throw std::invalid_argument("annealing configuration out of range");
  }
}

struct OptimizationResult {
  RatePlan best_plan;
  double best_value = 0.0;
  std::vector<double> restart_values;  ///< best value found by each restart
  std::uint64_t evaluations = 0;
};

using Objective = std::function<double(const RatePlan&)>;

namespace detail {

inline double rate_cap(const ConnectionParams& params) {
  return (1.0 / params.service_time) * (1.0 - 1e-9);
}

/// Symmetric Dirichlet-like sample scaled to `total`, then water-filled into
/// the box [0, cap].  Feasible whenever total <= d * cap.
inline std::vector<double> random_feasible_rates(int d, double total, double cap,
                                                 SplitMix64& rng) {
  std::vector<double> rates(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (double& r : rates) {
    r = -std::log(1.0 - rng.next_double());
    sum += r;
  }
  if (sum <= 0.0) {
    std::fill(rates.begin(), rates.end(), 1.0);
    sum = static_cast<double>(d);
  }
  for (double& r : rates) r = total * r / sum;

  // Push mass above the cap onto the coordinates that still have headroom.
  for (int pass = 0; pass < d; ++pass) {
    double excess = 0.0;
    double free_sum = 0.0;
    for (double& r : rates) {
      if (r > cap) {
        excess += r - cap;
        r = cap;
      } else {
        free_sum += r;
      }
    }
    if (excess <= 0.0) break;
    if (free_sum > 0.0) {
      const double grow = (free_sum + excess) / free_sum;
      for (double& r : rates) {
        if (r < cap) r *= grow;
      }
    } else {
      const double share = excess / static_cast<double>(d);
      for (double& r : rates) r = std::min(cap, r + share);
    }
  }

  // Absorb the rounding residual wherever the box allows.
  double residual = total;
  for (double r : rates) residual -= r;
  for (double& r : rates) {
    const double adjusted = std::clamp(r + residual, 0.0, cap);
    residual -= adjusted - r;
    r = adjusted;
    if (residual == 0.0) break;
  }
  return rates;
}

}  // namespace detail

/// Maximize `objective` over rate plans with d entries summing to Lambda.
///
/// When `local_first` is set, plans carry rates[0] as the locally served
/// share; the canonical result then sorts only the forwarded tail descending
/// (the objectives are invariant under permutations of the forwarded rates,
/// so sorting makes sweep output stable without changing the value).
inline OptimizationResult anneal(const Objective& objective, int d, double total_rate,
                                 const ConnectionParams& params, const AnnealConfig& config,
                                 bool local_first = false) {
  validate(params);
  validate(config);
  if (d < 1) throw std::domain_error("need at least one connection");
  const double cap = detail::rate_cap(params);
  if (!(std::isfinite(total_rate) && total_rate > 0.0 && total_rate <= cap * d)) {
    throw std::domain_error("total rate infeasible for the given connection count");
  }

  OptimizationResult result;
  auto evaluate = [&](const RatePlan& plan) {
    ++result.evaluations;
    const double value = objective(plan);
    return std::isfinite(value) ? value : 0.0;
  };

  if (d == 1) {
    // The simplex is a single point.
    RatePlan plan{{total_rate}, local_first};
    const double value = evaluate(plan);
    result.best_plan = plan;
    result.best_value = value;
    result.restart_values.assign(static_cast<std::size_t>(config.restarts), value);
    return result;
  }

  const double step_bound = config.step_scale / params.service_time;
  bool have_best = false;

  for (int restart = 0; restart < config.restarts; ++restart) {
    SplitMix64 rng(derive_stream_seed(config.seed, static_cast<std::uint64_t>(restart)));
    RatePlan current{detail::random_feasible_rates(d, total_rate, cap, rng), local_first};
    double current_value = evaluate(current);
    RatePlan restart_best = current;
    double restart_best_value = current_value;

    double temperature = config.initial_temperature;
    for (int step = 0; step < config.steps_per_restart; ++step) {
      // Move magnitude shrinks with the temperature (step_scale sets the
      // initial bound); the floor keeps late-stage polishing alive.
      const double shrink =
          std::max(std::sqrt(temperature / config.initial_temperature), 1e-4);
      const std::size_t from = static_cast<std::size_t>(rng.below(d));
      std::size_t to = static_cast<std::size_t>(rng.below(d - 1));
      if (to >= from) ++to;
      const double delta = rng.next_double() * step_bound * shrink;
      const double transfer =
          std::min({delta, current.rates[from], cap - current.rates[to]});

      RatePlan candidate = current;
      candidate.rates[from] -= transfer;
      candidate.rates[to] += transfer;
      const double candidate_value = evaluate(candidate);

      const double gain = candidate_value - current_value;
      bool accept = gain >= 0.0;
      if (!accept) {
        accept = rng.next_double() < std::exp(gain / temperature);
      }
      if (accept) {
        current = std::move(candidate);
        current_value = candidate_value;
        if (current_value > restart_best_value) {
          restart_best = current;
          restart_best_value = current_value;
        }
      }
      temperature *= config.cooling_factor;
    }

    result.restart_values.push_back(restart_best_value);
    // Strict improvement only: ties go to the lowest restart index.
    if (!have_best || restart_best_value > result.best_value) {
      result.best_plan = std::move(restart_best);
      result.best_value = restart_best_value;
      have_best = true;
    }
  }

  auto tail_begin = result.best_plan.rates.begin() + (local_first ? 1 : 0);
  std::sort(tail_begin, result.best_plan.rates.end(), std::greater<>());
  return result;
}

/// Maximize the off-time-per-request objective over d connections.
inline OptimizationResult optimize_opr(int d, double total_rate, const ConnectionParams& params,
                                       const AnnealConfig& config) {
  return anneal([&params](const RatePlan& plan) { return opr(plan, params); }, d, total_rate,
                params, config, /*local_first=*/false);
}

/// Maximize the service-off-time-per-request objective; rates[0] is the
/// locally served share.
inline OptimizationResult optimize_sopr(int d, double total_rate, const ConnectionParams& params,
                                        const AnnealConfig& config) {
  if (d < 2) throw std::domain_error("SOPR needs at least one forwarded connection");
  return anneal([&params](const RatePlan& plan) { return sopr(plan, params); }, d, total_rate,
                params, config, /*local_first=*/true);
}

enum class ObjectiveKind { kOpr, kSopr };

struct SweepRow {
  double total_rate = 0.0;
  OptimizationResult result;
  bool ok = false;
  std::string error;  ///< set when this grid point failed; the sweep goes on
};

/// One optimization per grid point.  Every row uses the same config (and
/// seed), so a one-point sweep reproduces a direct optimize call exactly.
inline std::vector<SweepRow> sweep(ObjectiveKind kind, int d,
                                   const std::vector<double>& total_rate_grid,
                                   const ConnectionParams& params, const AnnealConfig& config) {
  std::vector<SweepRow> rows;
  rows.reserve(total_rate_grid.size());
  for (double total_rate : total_rate_grid) {
    SweepRow row;
    row.total_rate = total_rate;
    try {
      row.result = kind == ObjectiveKind::kOpr ? optimize_opr(d, total_rate, params, config)
                                               : optimize_sopr(d, total_rate, params, config);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace peereff
