#pragma once

/// Event-stepped Monte Carlo of a single connection, the empirical check on
/// the closed-form efficiency.
///
/// Requests arrive with exponential inter-arrival times drawn by inversion,
/// Arrival = (-1/lambda) * ln(1 - X) with X uniform on [0,1).  Each request
/// is served in t_s if the connection is up, or t_c + t_s if it must first
/// reconnect; after every service the peer drops the connection with
/// probability p.  Wasted time is the setup cost of each reconnect plus every
/// connected-but-idle gap.  Time spent fully disconnected is not waste.  The
/// simulation starts disconnected and reports eta = 1 - waste / elapsed.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "peereff/connection.hpp"
#include "peereff/random.hpp"

namespace peereff {

struct SimConfig {
  double lambda = 0.5;          ///< arrival rate, > 0
  double p = 1.0;               ///< disconnect probability after each service
  ConnectionParams params;
  std::int64_t arrivals = 5000; ///< run length in requests
  std::uint64_t seed = 1;
};

inline void validate(const SimConfig& config) {
  validate(config.params);
  if (!(std::isfinite(config.lambda) && config.lambda > 0.0)) {
    throw std::domain_error("simulation needs a positive arrival rate");
  }
  detail::require_probability(config.p);
  if (config.arrivals < 1) throw std::domain_error("need at least one arrival");
}

struct SimReport {
  double waste = 0.0;    ///< reconnect setup plus connected-idle time
  double elapsed = 0.0;  ///< clock when the last service completes
  double efficiency = 0.0;
  std::int64_t arrivals_processed = 0;
};

inline SimReport simulate_connection(const SimConfig& config) {
  validate(config);
  SplitMix64 rng(config.seed);
  const double t_c = config.params.connect_time;
  const double t_s = config.params.service_time;

  bool connected = false;
  double waste = 0.0;
  double current_time = 0.0;
  double arrivals_time = 0.0;

  for (std::int64_t i = 0; i < config.arrivals; ++i) {
    arrivals_time += -std::log(1.0 - rng.next_double()) / config.lambda;
    // Idle gap until this arrival; zero when the queue is backlogged.
    double gap = arrivals_time - current_time;
    if (gap < 0.0) gap = 0.0;
    if (connected) {
      waste += gap;
      current_time += gap + t_s;
    } else {
      waste += t_c;
      current_time += gap + t_c + t_s;
    }
    // The disconnect decision follows every service, queued work or not;
    // that is what makes the service time an independent two-point draw.
    connected = !(rng.next_double() < config.p);
  }

  SimReport report;
  report.waste = waste;
  report.elapsed = current_time;
  report.efficiency = 1.0 - waste / current_time;
  report.arrivals_processed = config.arrivals;
  return report;
}

struct SimSweepRow {
  double lambda = 0.0;
  double p = 0.0;
  SimReport report;
};

/// One simulation per grid point.  Row i runs with seed
/// derive_stream_seed(seed, i), so rows are independent of execution order.
/// With `use_optimal_p` each point runs at p*(lambda); otherwise `fixed_p`
/// applies everywhere.
inline std::vector<SimSweepRow> sweep_simulation(const std::vector<double>& lambda_grid,
                                                 bool use_optimal_p, double fixed_p,
                                                 const ConnectionParams& params,
                                                 std::int64_t arrivals, std::uint64_t seed) {
  std::vector<SimSweepRow> rows;
  rows.reserve(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    SimSweepRow row;
    row.lambda = lambda_grid[i];
    row.p = use_optimal_p ? optimal_disconnect_prob(row.lambda, params) : fixed_p;
    SimConfig config;
    config.lambda = row.lambda;
    config.p = row.p;
    config.params = params;
    config.arrivals = arrivals;
    config.seed = derive_stream_seed(seed, i);
    row.report = simulate_connection(config);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace peereff
