// Command-line front end: every model quantity as a point query or sweep,
// emitted as CSV.  Exit codes: 0 success, 2 flag/validation error, 3
// numerical domain error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "peereff/peereff.hpp"

namespace {

using peereff::AnnealConfig;
using peereff::ConnectionParams;
using peereff::RatePlan;

/// Cross-field validation problems discovered after flag parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Output {
  std::unique_ptr<std::ofstream> file;
  std::ostream* stream = &std::cout;

  static Output open(const std::string& path) {
    Output out;
    if (!path.empty()) {
      out.file = std::make_unique<std::ofstream>(path);
      if (!*out.file) throw UsageError("cannot open output file: " + path);
      out.stream = out.file.get();
    }
    return out;
  }
};

/// points values spanning (0, 1/t_s], evenly spaced, closed on the right.
std::vector<double> lambda_grid(int points, double ts) {
  std::vector<double> grid;
  grid.reserve(points);
  for (int k = 1; k <= points; ++k) {
    grid.push_back(static_cast<double>(k) / (static_cast<double>(points) * ts));
  }
  return grid;
}

/// points values strictly inside (0, d/t_s).
std::vector<double> total_rate_grid(int points, int d, double ts) {
  std::vector<double> grid;
  grid.reserve(points);
  const double span = static_cast<double>(d) / ts;
  for (int k = 1; k <= points; ++k) {
    grid.push_back(span * static_cast<double>(k) / static_cast<double>(points + 1));
  }
  return grid;
}

void write_point_row(std::ostream& out, const peereff::ConnectionMetrics& m) {
  peereff::write_csv_numbers(out, {m.lambda, m.p, m.expected_service, m.rho, m.eta, m.scv,
                                   m.queue_len, m.off, m.wait});
}

void run_point(std::ostream& out, double tc, double ts, double lambda) {
  const auto m = peereff::metrics(lambda, ConnectionParams{tc, ts});
  peereff::write_csv_row(out, {"lambda", "p", "expected_service", "rho", "eta", "scv",
                               "queue_length", "off_time", "waiting_time"});
  write_point_row(out, m);
}

void run_eta_sweep(std::ostream& out, double tc, double ts, int points) {
  const ConnectionParams params{tc, ts};
  peereff::write_csv_row(out, {"normalized_lambda", "lambda", "p_star", "eta"});
  for (double lambda : lambda_grid(points, ts)) {
    const double p = peereff::optimal_disconnect_prob(lambda, params);
    peereff::write_csv_numbers(out,
                               {lambda * ts, lambda, p, peereff::efficiency(p, lambda, params)});
  }
}

void run_simulate(std::ostream& out, double tc, double ts, bool have_lambda, double lambda,
                  int points, std::int64_t arrivals, std::uint64_t seed) {
  const ConnectionParams params{tc, ts};
  if (have_lambda) {
    peereff::SimConfig config;
    config.lambda = lambda;
    config.p = peereff::optimal_disconnect_prob(lambda, params);
    config.params = params;
    config.arrivals = arrivals;
    config.seed = seed;
    const auto report = peereff::simulate_connection(config);
    peereff::write_csv_row(out, {"lambda", "p", "eta_sim"});
    peereff::write_csv_numbers(out, {lambda, config.p, report.efficiency});
    return;
  }
  const auto rows =
      peereff::sweep_simulation(lambda_grid(points, ts), true, 0.0, params, arrivals, seed);
  peereff::write_csv_row(out, {"lambda", "p", "eta_sim"});
  for (const auto& row : rows) {
    peereff::write_csv_numbers(out, {row.lambda, row.p, row.report.efficiency});
  }
}

void write_optimize_csv(std::ostream& out, const std::vector<peereff::SweepRow>& rows, int d) {
  std::vector<std::string> header{"Lambda"};
  for (int i = 0; i < d; ++i) header.push_back("lambda_" + std::to_string(i));
  header.push_back("value");
  peereff::write_csv_row(out, header);
  for (const auto& row : rows) {
    std::vector<double> cells{row.total_rate};
    if (row.ok) {
      cells.insert(cells.end(), row.result.best_plan.rates.begin(),
                   row.result.best_plan.rates.end());
      cells.push_back(row.result.best_value);
    } else {
      std::cerr << "warning: Lambda=" << peereff::format_number(row.total_rate)
                << " skipped: " << row.error << "\n";
      cells.insert(cells.end(), static_cast<std::size_t>(d) + 1,
                   std::numeric_limits<double>::quiet_NaN());
    }
    peereff::write_csv_numbers(out, cells);
  }
}

void run_optimize(std::ostream& out, const std::string& objective, int d, double tc, double ts,
                  bool have_total, double total_rate, int points, const AnnealConfig& config) {
  const ConnectionParams params{tc, ts};
  const auto kind =
      objective == "sopr" ? peereff::ObjectiveKind::kSopr : peereff::ObjectiveKind::kOpr;
  std::vector<peereff::SweepRow> rows;
  if (have_total) {
    // A single point reports its domain errors directly instead of flagging.
    peereff::SweepRow row;
    row.total_rate = total_rate;
    row.result = kind == peereff::ObjectiveKind::kOpr
                     ? peereff::optimize_opr(d, total_rate, params, config)
                     : peereff::optimize_sopr(d, total_rate, params, config);
    row.ok = true;
    rows.push_back(std::move(row));
  } else {
    rows = peereff::sweep(kind, d, total_rate_grid(points, d, ts), params, config);
  }
  write_optimize_csv(out, rows, d);
}

void run_traversal(std::ostream& out, double tc, double ts, double lambda0, double total_rate,
                   const std::vector<double>& forwarded, long truncation) {
  const ConnectionParams params{tc, ts};
  double forwarded_sum = 0.0;
  for (double r : forwarded) forwarded_sum += r;
  if (std::abs(lambda0 + forwarded_sum - total_rate) > 1e-9) {
    throw UsageError("forwarded rates plus lambda0 must sum to Lambda");
  }
  RatePlan plan;
  plan.local_first = true;
  plan.rates.push_back(lambda0);
  plan.rates.insert(plan.rates.end(), forwarded.begin(), forwarded.end());

  const auto stats = peereff::traversal(plan, params);
  const double local_queue = peereff::local_queue_length(lambda0, params);
  const double series =
      peereff::total_queue_series(stats.service_prob, stats.hop_queue, local_queue, truncation);
  peereff::write_csv_row(out, {"p_s", "k", "mean_hop_queue", "total_series", "total_closed"});
  peereff::write_csv_numbers(out,
                             {stats.service_prob, stats.hops, stats.hop_queue, series,
                              stats.total_queue});
}

void run_paper_figures(const std::string& dir, int points, std::int64_t arrivals,
                       const AnnealConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::vector<std::pair<double, double>> tc_ts_series = {
      {1, 1}, {2, 1}, {3, 1}, {4, 1}, {1, 2}, {1, 3}, {1, 4}};

  auto open = [&dir](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw UsageError("cannot write to output directory: " + dir);
    std::cerr << "writing " << (fs::path(dir) / name).string() << "\n";
    return out;
  };

  {
    auto out = open("eta_theory.csv");
    peereff::write_csv_row(out, {"tc", "ts", "normalized_lambda", "lambda", "p_star", "eta"});
    for (auto [tc, ts] : tc_ts_series) {
      const ConnectionParams params{tc, ts};
      for (double lambda : lambda_grid(100, ts)) {
        const double p = peereff::optimal_disconnect_prob(lambda, params);
        peereff::write_csv_numbers(
            out, {tc, ts, lambda * ts, lambda, p, peereff::efficiency(p, lambda, params)});
      }
    }
  }
  {
    auto out = open("eta_simulation.csv");
    peereff::write_csv_row(out, {"tc", "ts", "normalized_lambda", "lambda", "p", "eta_sim"});
    std::uint64_t series_index = 0;
    for (auto [tc, ts] : tc_ts_series) {
      const ConnectionParams params{tc, ts};
      const auto rows =
          peereff::sweep_simulation(lambda_grid(20, ts), true, 0.0, params, arrivals,
                                    peereff::derive_stream_seed(config.seed, series_index++));
      for (const auto& row : rows) {
        peereff::write_csv_numbers(
            out, {tc, ts, row.lambda * ts, row.lambda, row.p, row.report.efficiency});
      }
    }
  }

  struct Panel {
    std::string name;
    peereff::ObjectiveKind kind;
    int d;
    double tc, ts;
  };
  const std::vector<Panel> panels = {
      {"opr_d2.csv", peereff::ObjectiveKind::kOpr, 2, 1, 1},
      {"opr_d3.csv", peereff::ObjectiveKind::kOpr, 3, 1, 1},
      {"opr_d5.csv", peereff::ObjectiveKind::kOpr, 5, 1, 1},
      {"opr_d10.csv", peereff::ObjectiveKind::kOpr, 10, 1, 1},
      {"opr_d5_tc5_ts1.csv", peereff::ObjectiveKind::kOpr, 5, 5, 1},
      {"opr_d5_tc1_ts5.csv", peereff::ObjectiveKind::kOpr, 5, 1, 5},
      {"sopr_d3.csv", peereff::ObjectiveKind::kSopr, 3, 1, 1},
      {"sopr_d5.csv", peereff::ObjectiveKind::kSopr, 5, 1, 1},
  };
  for (const auto& panel : panels) {
    auto out = open(panel.name);
    const ConnectionParams params{panel.tc, panel.ts};
    write_optimize_csv(
        out, peereff::sweep(panel.kind, panel.d, total_rate_grid(points, panel.d, panel.ts),
                            params, config),
        panel.d);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"peer connection-efficiency model: closed forms, rate-assignment optimization, "
               "and Monte-Carlo validation"};
  app.require_subcommand(1);

  double tc = 1.0;
  double ts = 1.0;
  double lambda = 0.0;
  double total_rate = 0.0;
  double lambda0 = 0.0;
  int d = 2;
  int points = 100;
  std::int64_t arrivals = 5000;
  std::uint64_t seed = 1;
  long truncation = 10000;
  std::string out_path;
  std::string objective = "opr";
  std::vector<double> forwarded;
  AnnealConfig anneal_defaults;

  auto add_params = [&](CLI::App* cmd) {
    cmd->add_option("--tc", tc, "connection setup time")->check(CLI::PositiveNumber);
    cmd->add_option("--ts", ts, "service time")->check(CLI::PositiveNumber);
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "write CSV here instead of stdout");
  };
  auto add_anneal = [&](CLI::App* cmd, AnnealConfig& config) {
    cmd->add_option("--restarts", config.restarts, "annealing restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--steps", config.steps_per_restart, "steps per restart")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cooling", config.cooling_factor, "temperature factor per step")
        ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)));
    cmd->add_option("--temp", config.initial_temperature, "initial temperature")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--step-scale", config.step_scale, "initial move size as fraction of 1/ts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", config.seed, "random seed");
  };

  auto* point = app.add_subcommand("point", "all per-connection quantities at one arrival rate");
  add_params(point);
  add_out(point);
  point->add_option("--lambda", lambda, "arrival rate")->required();

  auto* eta_sweep =
      app.add_subcommand("eta-sweep", "optimal disconnect probability and efficiency over "
                                      "arrival rates in (0, 1/ts]");
  add_params(eta_sweep);
  add_out(eta_sweep);
  eta_sweep->add_option("--points", points, "grid size")->check(CLI::Range(2, 100000000));

  auto* simulate = app.add_subcommand(
      "simulate", "Monte-Carlo efficiency at the optimal disconnect probability");
  add_params(simulate);
  add_out(simulate);
  auto* sim_lambda = simulate->add_option("--lambda", lambda, "single arrival rate");
  auto* sim_points =
      simulate->add_option("--points", points, "grid size over (0, 1/ts]")->excludes(sim_lambda);
  sim_lambda->excludes(sim_points);
  simulate->add_option("--arrivals", arrivals, "arrivals per run")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "random seed");

  auto* optimize =
      app.add_subcommand("optimize", "anneal the rate assignment maximizing OPR or SOPR");
  add_params(optimize);
  add_out(optimize);
  optimize->add_option("--objective", objective, "opr or sopr")
      ->check(CLI::IsMember({"opr", "sopr"}));
  optimize->add_option("--d", d, "number of connections")->check(CLI::PositiveNumber);
  auto* opt_total = optimize->add_option("--Lambda", total_rate, "single aggregate rate");
  auto* opt_points = optimize->add_option("--points", points, "grid size over (0, d/ts)")
                         ->excludes(opt_total);
  opt_total->excludes(opt_points);
  AnnealConfig opt_config = anneal_defaults;
  add_anneal(optimize, opt_config);

  auto* traversal_cmd = app.add_subcommand(
      "traversal", "hop count and chain queue totals for a local/forwarded rate split");
  add_params(traversal_cmd);
  add_out(traversal_cmd);
  traversal_cmd->add_option("--lambda0", lambda0, "locally served rate")->required();
  traversal_cmd->add_option("--Lambda", total_rate, "aggregate rate")->required();
  traversal_cmd->add_option("rates", forwarded, "forwarded per-connection rates");
  traversal_cmd->add_option("--truncation", truncation, "series truncation length")
      ->check(CLI::PositiveNumber);

  auto* figures = app.add_subcommand(
      "paper-figures", "write the full reference CSV set (efficiency curves, simulation "
                       "sweep, OPR/SOPR rate assignments) into a directory");
  std::string fig_dir = ".";
  figures->add_option("--out", fig_dir, "output directory");
  figures->add_option("--points", points, "grid size per optimization sweep")
      ->check(CLI::PositiveNumber);
  figures->add_option("--arrivals", arrivals, "arrivals per simulation run")
      ->check(CLI::PositiveNumber);
  AnnealConfig fig_config = anneal_defaults;
  add_anneal(figures, fig_config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (point->parsed()) {
      auto out = Output::open(out_path);
      run_point(*out.stream, tc, ts, lambda);
    } else if (eta_sweep->parsed()) {
      auto out = Output::open(out_path);
      run_eta_sweep(*out.stream, tc, ts, points);
    } else if (simulate->parsed()) {
      if (sim_lambda->count() == 0 && sim_points->count() == 0) {
        throw UsageError("simulate needs --lambda or --points");
      }
      auto out = Output::open(out_path);
      run_simulate(*out.stream, tc, ts, sim_lambda->count() > 0, lambda, points, arrivals, seed);
    } else if (optimize->parsed()) {
      if (opt_total->count() == 0 && opt_points->count() == 0) {
        throw UsageError("optimize needs --Lambda or --points");
      }
      auto out = Output::open(out_path);
      run_optimize(*out.stream, objective, d, tc, ts, opt_total->count() > 0, total_rate, points,
                   opt_config);
    } else if (traversal_cmd->parsed()) {
      auto out = Output::open(out_path);
      run_traversal(*out.stream, tc, ts, lambda0, total_rate, forwarded, truncation);
    } else if (figures->parsed()) {
      run_paper_figures(fig_dir, figures->get_option("--points")->count() > 0 ? points : 40,
                        arrivals, fig_config);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
