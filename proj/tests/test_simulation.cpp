#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include "peereff/simulation.hpp"

using namespace peereff;

namespace {
const ConnectionParams kUnit{1.0, 1.0};

SimConfig make_config(double lambda, double p, std::uint64_t seed = 11,
                      std::int64_t arrivals = 5000) {
  SimConfig config;
  config.lambda = lambda;
  config.p = p;
  config.params = kUnit;
  config.arrivals = arrivals;
  config.seed = seed;
  return config;
}
}  // namespace

TEST_CASE("simulation input validation") {
  CHECK_THROWS_AS(simulate_connection(make_config(0.0, 0.5)), std::domain_error);
  CHECK_THROWS_AS(simulate_connection(make_config(-1.0, 0.5)), std::domain_error);
  CHECK_THROWS_AS(simulate_connection(make_config(0.5, 1.5)), std::domain_error);
  auto config = make_config(0.5, 0.5);
  config.arrivals = 0;
  CHECK_THROWS_AS(simulate_connection(config), std::domain_error);
}

TEST_CASE("an always-disconnecting peer under a trickle of requests is efficient") {
  const auto report = simulate_connection(make_config(1e-3, 1.0));
  CHECK(report.efficiency >= 0.99);
}

TEST_CASE("simulated efficiency matches the closed form at a checked point") {
  const auto report = simulate_connection(make_config(0.5, 0.5));
  CHECK(report.efficiency == Approx(0.625).margin(0.05));
  CHECK(report.arrivals_processed == 5000);
}

TEST_CASE("identical configurations produce identical reports") {
  const auto a = simulate_connection(make_config(0.5, 0.5, 99));
  const auto b = simulate_connection(make_config(0.5, 0.5, 99));
  CHECK(a.waste == b.waste);
  CHECK(a.elapsed == b.elapsed);
  CHECK(a.efficiency == b.efficiency);
  const auto c = simulate_connection(make_config(0.5, 0.5, 100));
  CHECK(a.waste != c.waste);
}

TEST_CASE("with certain disconnects the waste is exactly the reconnect cost") {
  for (std::uint64_t seed : {1ULL, 5ULL, 23ULL}) {
    const auto report = simulate_connection(make_config(0.4, 1.0, seed));
    CHECK(report.waste == 5000.0 * kUnit.connect_time);
    CHECK(report.efficiency == 1.0 - report.waste / report.elapsed);
  }
}

TEST_CASE("a never-disconnecting peer tracks its utilization") {
  for (double lambda : {0.25, 0.5, 0.8}) {
    const auto report = simulate_connection(make_config(lambda, 0.0));
    CHECK(report.efficiency == Approx(lambda * kUnit.service_time).margin(0.05));
  }
}

TEST_CASE("efficiency always lands in the unit interval") {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const double lambda = 0.05 + 1.5 * rng.next_double();
    const double p = rng.next_double();
    const auto report = simulate_connection(make_config(lambda, p, rng.next_u64(), 500));
    REQUIRE(report.efficiency >= 0.0);
    REQUIRE(report.efficiency <= 1.0);
    REQUIRE(report.waste >= 0.0);
    REQUIRE(report.waste <= report.elapsed);
  }
}

TEST_CASE("efficiency estimates are tight across seeds") {
  std::vector<double> etas;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    etas.push_back(simulate_connection(make_config(0.5, 0.5, seed)).efficiency);
  }
  double mean = 0.0;
  for (double e : etas) mean += e;
  mean /= etas.size();
  double variance = 0.0;
  for (double e : etas) variance += (e - mean) * (e - mean);
  variance /= etas.size() - 1;
  const double standard_error = std::sqrt(variance / etas.size());
  CHECK(standard_error < 0.02);
  CHECK(mean == Approx(0.625).margin(0.02));
}

TEST_CASE("a sweep at the optimal policy stays near the closed form") {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 20.0);
  const auto rows = sweep_simulation(grid, true, 0.0, kUnit, 5000, 17);
  REQUIRE(rows.size() == 20);
  for (const auto& row : rows) {
    const double theory = efficiency(row.p, row.lambda, kUnit);
    CHECK(row.report.efficiency == Approx(theory).margin(0.05));
  }
}

TEST_CASE("a one-point sweep is one derived-seed run") {
  const auto rows = sweep_simulation({0.5}, true, 0.0, kUnit, 5000, 17);
  REQUIRE(rows.size() == 1);
  auto config = make_config(0.5, optimal_disconnect_prob(0.5, kUnit), derive_stream_seed(17, 0));
  const auto direct = simulate_connection(config);
  CHECK(rows[0].report.efficiency == direct.efficiency);
  CHECK(rows[0].report.waste == direct.waste);
}

TEST_CASE("a fixed-policy sweep uses the supplied probability") {
  const auto rows = sweep_simulation({0.25, 0.5}, false, 0.3, kUnit, 2000, 3);
  for (const auto& row : rows) CHECK(row.p == 0.3);
}
