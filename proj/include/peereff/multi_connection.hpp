#pragma once

/// Multi-connection objectives and the request-traversal model.
///
/// A peer receiving requests at aggregate rate Lambda spreads them over d
/// outgoing connections, forwarding to connection i with probability
/// lambda_i / Lambda.  Every connection runs at its own optimal disconnect
/// probability p*(lambda_i) and shares the same (t_c, t_s).  Rates must
/// observe 0 <= lambda_i < 1/t_s so each queue stays finite.

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "peereff/connection.hpp"

namespace peereff {

/// Assignment of per-connection arrival rates.  When `local_first` is set,
/// rates[0] is the share the peer serves itself (no connection cost); the
/// remaining entries are forwarded over connections.
struct RatePlan {
  std::vector<double> rates;
  bool local_first = false;

  double total() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }
};

namespace detail {

inline void require_connection_rate(double lambda, const ConnectionParams& params) {
  require_rate(lambda);
  if (lambda >= 1.0 / params.service_time) {
    throw std::domain_error("per-connection rate must stay below 1/t_s");
  }
}

}  // namespace detail

/// Queue length of the locally served share: rho_0^2/(1-rho_0) with
/// rho_0 = lambda_0 * t_s.  No setup time and no idle waste for local
/// service, hence no variation term.
inline double local_queue_length(double lambda0, const ConnectionParams& params) {
  validate(params);
  detail::require_rate(lambda0);
  const double rho0 = lambda0 * params.service_time;
  if (rho0 >= 1.0) throw std::domain_error("local rate must satisfy lambda0 * t_s < 1");
  return rho0 * rho0 / (1.0 - rho0);
}

/// Off-time per request
///
///   OPR = sum_i xi_i / sum_i L_i
///
/// with every connection at its optimal disconnect probability.  An idle
/// connection (lambda_i = 0) contributes xi_i = 1 and L_i = 0, which is what
/// makes parked connections attractive at low load.  Unbounded above; throws
/// when all rates are zero (no queued requests) or any rate reaches 1/t_s.
inline double opr(const RatePlan& plan, const ConnectionParams& params) {
  validate(params);
  if (plan.rates.empty()) throw std::domain_error("rate plan is empty");
  double off_sum = 0.0;
  double queue_sum = 0.0;
  for (double lambda : plan.rates) {
    detail::require_connection_rate(lambda, params);
    const double p = optimal_disconnect_prob(lambda, params);
    off_sum += off_time(lambda, p, params);
    queue_sum += queue_length(lambda, p, params);
  }
  if (queue_sum == 0.0) throw std::domain_error("OPR undefined when every rate is zero");
  return off_sum / queue_sum;
}

/// Service off-time per request: as OPR, but rates[0] is served locally with
/// queue L_0 = rho_0^2/(1-rho_0) and does not count toward the off-time sum.
///
///   SOPR = sum_{i>=1} xi_i / (L_0 + sum_{i>=1} L_i)
inline double sopr(const RatePlan& plan, const ConnectionParams& params) {
  validate(params);
  if (!plan.local_first) throw std::invalid_argument("SOPR needs a plan with a local rate");
  if (plan.rates.size() < 2) throw std::domain_error("SOPR needs at least one forwarded rate");
  double off_sum = 0.0;
  double queue_sum = local_queue_length(plan.rates[0], params);
  for (std::size_t i = 1; i < plan.rates.size(); ++i) {
    const double lambda = plan.rates[i];
    detail::require_connection_rate(lambda, params);
    const double p = optimal_disconnect_prob(lambda, params);
    off_sum += off_time(lambda, p, params);
    queue_sum += queue_length(lambda, p, params);
  }
  if (queue_sum == 0.0) {
    throw std::domain_error("SOPR undefined when the local and forwarded rates are all zero");
  }
  return off_sum / queue_sum;
}

/// Probability that a request is served at this peer rather than forwarded.
inline double service_probability(double lambda0, double total_rate) {
  detail::require_rate(lambda0);
  if (!(std::isfinite(total_rate) && total_rate > 0.0)) {
    throw std::domain_error("total rate must be positive");
  }
  if (lambda0 == 0.0) throw std::domain_error("service probability is zero: hop count diverges");
  if (lambda0 > total_rate) throw std::domain_error("local rate exceeds total rate");
  return lambda0 / total_rate;
}

/// Mean number of peers a request passes through (including the last),
/// k = 1/p_s for the geometric forwarding chain.
inline double expected_hops(double service_prob) {
  if (!(service_prob > 0.0 && service_prob <= 1.0)) {
    throw std::domain_error("service probability must lie in (0,1]");
  }
  return 1.0 / service_prob;
}

/// Queue length a request sees at one forwarding hop: the rate-weighted mean
/// of the per-connection queues, sum_{i>=1} L_i * lambda_i / (Lambda - lambda_0).
inline double mean_hop_queue(const RatePlan& plan, const ConnectionParams& params) {
  validate(params);
  if (!plan.local_first) throw std::invalid_argument("hop queue needs a plan with a local rate");
  if (plan.rates.size() < 2) throw std::domain_error("no forwarded rates");
  const double forwarded_total = plan.total() - plan.rates[0];
  if (!(forwarded_total > 0.0)) {
    throw std::domain_error("hop queue undefined without forwarded load");
  }
  double weighted = 0.0;
  for (std::size_t i = 1; i < plan.rates.size(); ++i) {
    const double lambda = plan.rates[i];
    detail::require_connection_rate(lambda, params);
    const double p = optimal_disconnect_prob(lambda, params);
    weighted += queue_length(lambda, p, params) * lambda;
  }
  return weighted / forwarded_total;
}

/// Truncated series for the total queue length a request experiences across
/// its whole forwarding chain:
///
///   sum_{i=1}^{N} p_s (1-p_s)^{i-1} (hop_queue*(i-1) + local_queue)
inline double total_queue_series(double service_prob, double hop_queue, double local_queue,
                                 long truncation) {
  if (!(service_prob > 0.0 && service_prob <= 1.0)) {
    throw std::domain_error("service probability must lie in (0,1]");
  }
  if (!(hop_queue >= 0.0) || !(local_queue >= 0.0)) {
    throw std::domain_error("queue lengths must be >= 0");
  }
  if (truncation < 1) throw std::domain_error("truncation must be >= 1");
  // Kahan summation: the acceptance tolerance on series-vs-closed-form
  // agreement is tighter than naive accumulation over 1e4 terms guarantees.
  double sum = 0.0;
  double carry = 0.0;
  double geometric = service_prob;  // p_s * (1-p_s)^(i-1)
  for (long i = 1; i <= truncation; ++i) {
    const double term = geometric * (hop_queue * static_cast<double>(i - 1) + local_queue);
    const double y = term - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    geometric *= 1.0 - service_prob;
  }
  return sum;
}

/// Exact limit of total_queue_series as the truncation goes to infinity:
/// hop_queue * (1-p_s)/p_s + local_queue.
inline double total_queue_closed(double service_prob, double hop_queue, double local_queue) {
  if (!(service_prob > 0.0 && service_prob <= 1.0)) {
    throw std::domain_error("service probability must lie in (0,1]");
  }
  if (!(hop_queue >= 0.0) || !(local_queue >= 0.0)) {
    throw std::domain_error("queue lengths must be >= 0");
  }
  return hop_queue * (1.0 - service_prob) / service_prob + local_queue;
}

/// Traversal summary for a plan with a local rate.
struct TraversalStats {
  double service_prob = 1.0;   ///< p_s = lambda_0 / Lambda
  double hops = 1.0;           ///< k = 1/p_s
  double hop_queue = 0.0;      ///< mean queue per forwarding hop
  double total_queue = 0.0;    ///< closed-form chain total
};

inline TraversalStats traversal(const RatePlan& plan, const ConnectionParams& params) {
  if (!plan.local_first) throw std::invalid_argument("traversal needs a plan with a local rate");
  if (plan.rates.empty()) throw std::domain_error("rate plan is empty");
  TraversalStats stats;
  const double total = plan.total();
  stats.service_prob = service_probability(plan.rates[0], total);
  stats.hops = expected_hops(stats.service_prob);
  const bool forwards = total - plan.rates[0] > 0.0 && plan.rates.size() > 1;
  stats.hop_queue = forwards ? mean_hop_queue(plan, params) : 0.0;
  stats.total_queue = total_queue_closed(stats.service_prob, stats.hop_queue,
                                         local_queue_length(plan.rates[0], params));
  return stats;
}

}  // namespace peereff
