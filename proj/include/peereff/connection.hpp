#pragma once

/// Single-connection model of a peer that opens a connection on demand and
/// may drop it after each completed service.
///
/// A request arriving while the peer is disconnected (probability p) pays the
/// connection setup time t_c on top of the service time t_s, so the service
/// time is a two-point distribution {t_c + t_s w.p. p, t_s w.p. 1-p} and the
/// connection behaves as an M/G/1 server.  The functions below give the
/// closed forms for expected service time, utilization, connection
/// efficiency, the efficiency-maximizing disconnect probability, the squared
/// coefficient of variation of the service time, the Pollaczek-Khinchine
/// queue length, the off-time fraction, and the queueing delay.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace peereff {

/// Physical constants of a connection: setup time and per-request service
/// time over an established connection.  Both strictly positive seconds.
struct ConnectionParams {
  double connect_time = 1.0;  ///< t_c > 0
  double service_time = 1.0;  ///< t_s > 0
};

/// Marker value for queue length / waiting time when utilization >= 1 and
/// the queue diverges.
inline constexpr double kUnstableQueue = std::numeric_limits<double>::infinity();

inline void validate(const ConnectionParams& params) {
  if (!(std::isfinite(params.connect_time) && params.connect_time > 0.0) ||
      !(std::isfinite(params.service_time) && params.service_time > 0.0)) {
    throw std::domain_error("connection times must be positive and finite");
  }
}

namespace detail {

inline void require_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("disconnect probability must lie in [0,1]");
  }
}

inline void require_rate(double lambda) {
  if (!(std::isfinite(lambda) && lambda >= 0.0)) {
    throw std::domain_error("arrival rate must be finite and >= 0");
  }
}

}  // namespace detail

/// Expected service time E[s] = p*t_c + t_s.
///
/// With probability p the arriving request finds the peer disconnected and
/// pays the setup time; otherwise it is served over the live connection.
inline double expected_service_time(double p, const ConnectionParams& params) {
  validate(params);
  detail::require_probability(p);
  return p * params.connect_time + params.service_time;
}

/// Utilization rho = lambda * E[s] of the M/G/1 server.
///
/// Not clamped: values >= 1 signal an unstable queue and callers decide how
/// to react.
inline double utilization(double lambda, double p, const ConnectionParams& params) {
  detail::require_rate(lambda);
  return lambda * expected_service_time(p, params);
}

/// Connection efficiency
///
///   eta = 1 - rho * p*t_c / (p*t_c + t_s) - (1 - rho)(1 - p),
///
/// one minus the fraction of time spent establishing connections minus the
/// fraction spent connected but idle.  Time spent fully disconnected counts
/// as efficient.  eta <= 1 whenever rho <= 1; it may go negative (or exceed
/// one in the unstable regime) for poorly chosen p -- no clamping.
inline double efficiency(double p, double lambda, const ConnectionParams& params) {
  const double service = expected_service_time(p, params);
  detail::require_rate(lambda);
  const double rho = lambda * service;
  return 1.0 - rho * (p * params.connect_time) / service - (1.0 - rho) * (1.0 - p);
}

/// Arrival-rate threshold a = 1/(2*t_c + t_s) below which never
/// disconnecting (p* = 1) is optimal.  Always in (0, 1/t_s).
inline double threshold_a(const ConnectionParams& params) {
  validate(params);
  return 1.0 / (2.0 * params.connect_time + params.service_time);
}

/// Disconnect probability p*(lambda) maximizing efficiency:
///
///   p* = 1                        for lambda <= a
///   p* = (1 - lambda*t_s) / (2*lambda*t_c)   for a < lambda <= 1/t_s
///   p* = 0                        for lambda > 1/t_s
///
/// Continuous at the branch point a; clamped against round-off so the result
/// is always in [0,1].
inline double optimal_disconnect_prob(double lambda, const ConnectionParams& params) {
  const double a = threshold_a(params);
  detail::require_rate(lambda);
  if (lambda <= a) return 1.0;
  if (lambda <= 1.0 / params.service_time) {
    const double p = (1.0 - lambda * params.service_time) / (2.0 * lambda * params.connect_time);
    return std::clamp(p, 0.0, 1.0);
  }
  return 0.0;
}

/// Squared coefficient of variation of the two-point service time,
/// C_s^2 = Var[s]/E[s]^2 = t_c^2 p (1-p) / (p*t_c + t_s)^2.
/// Zero at p = 0 and p = 1 (deterministic service).
inline double service_time_scv(double p, const ConnectionParams& params) {
  const double service = expected_service_time(p, params);
  return params.connect_time * params.connect_time * p * (1.0 - p) / (service * service);
}

/// Mean queue length by the Pollaczek-Khinchine formula,
/// L = rho^2/(1-rho) * (1 + C_s^2)/2.
///
/// Returns kUnstableQueue (+infinity) when rho >= 1 instead of throwing:
/// optimizers probe near the stability boundary and need to see the penalty.
inline double queue_length(double lambda, double p, const ConnectionParams& params) {
  const double rho = utilization(lambda, p, params);
  if (rho >= 1.0) return kUnstableQueue;
  const double scv = service_time_scv(p, params);
  return rho * rho / (1.0 - rho) * (1.0 + scv) / 2.0;
}

/// Off-time xi = p * (1 - rho): the fraction of time the connection is fully
/// down.  Undefined (throws) when rho > 1.
inline double off_time(double lambda, double p, const ConnectionParams& params) {
  const double rho = utilization(lambda, p, params);
  if (rho > 1.0) throw std::domain_error("off-time undefined for utilization > 1");
  return p * (1.0 - rho);
}

/// Queueing delay W_q = L_q / lambda.
inline double waiting_time(double queue_len, double lambda) {
  if (!(queue_len >= 0.0)) throw std::domain_error("queue length must be >= 0");
  if (!(std::isfinite(lambda) && lambda > 0.0)) {
    throw std::domain_error("waiting time requires a positive arrival rate");
  }
  return queue_len / lambda;
}

/// All per-connection quantities evaluated at the optimal disconnect
/// probability p*(lambda).  queue_len and wait carry kUnstableQueue when
/// rho >= 1.
struct ConnectionMetrics {
  double lambda = 0.0;
  double p = 1.0;                ///< p*(lambda)
  double expected_service = 0.0; ///< E[s]
  double rho = 0.0;
  double eta = 1.0;
  double scv = 0.0;              ///< C_s^2
  double queue_len = 0.0;        ///< L
  double off = 1.0;              ///< xi
  double wait = 0.0;             ///< W_q

  bool stable() const { return rho < 1.0; }
};

inline ConnectionMetrics metrics(double lambda, const ConnectionParams& params) {
  ConnectionMetrics m;
  m.lambda = lambda;
  m.p = optimal_disconnect_prob(lambda, params);
  m.expected_service = expected_service_time(m.p, params);
  m.rho = lambda * m.expected_service;
  m.eta = efficiency(m.p, lambda, params);
  m.scv = service_time_scv(m.p, params);
  m.queue_len = queue_length(lambda, m.p, params);
  // p* = 0 whenever rho >= 1, so xi stays in [0,1] even in the unstable
  // regime; adding +0.0 normalizes the negative zero that case produces.
  m.off = m.p * (1.0 - m.rho) + 0.0;
  m.wait = lambda > 0.0 ? m.queue_len / lambda : 0.0;
  return m;
}

}  // namespace peereff
