#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace isacsim {

namespace fs = std::filesystem;

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ExperimentError("cannot open output file '" + path + "'");
  return os;
}

void require_nonempty_file(const std::string& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec || size == 0) throw ExperimentError("output file missing or empty: '" + path + "'");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Jackknife 95% confidence interval for rho_s at one evaluation step.
struct RhoInterval {
  double lo{0};
  double hi{0};
};

RhoInterval jackknife_rho_interval(const std::vector<double>& radar,
                                   const std::vector<double>& fused, double rho_hat) {
  const std::size_t n = radar.size();
  if (n < 3) return RhoInterval{rho_hat, rho_hat};
  const auto sums = [](const std::vector<double>& xs) {
    double s1 = 0, s2 = 0;
    for (double x : xs) {
      s1 += x;
      s2 += x * x;
    }
    return std::pair<double, double>{s1, s2};
  };
  const auto [r1, r2] = sums(radar);
  const auto [f1, f2] = sums(fused);
  const auto loo_var = [n](double s1, double s2, double x) {
    const double m = (s1 - x) / static_cast<double>(n - 1);
    return (s2 - x * x - static_cast<double>(n - 1) * m * m) / static_cast<double>(n - 2);
  };
  std::vector<double> rho_loo(n);
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vr = loo_var(r1, r2, radar[i]);
    const double vf = loo_var(f1, f2, fused[i]);
    rho_loo[i] = (vr - vf) / vr;
    mean += rho_loo[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double r : rho_loo) ss += (r - mean) * (r - mean);
  const double se = std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
  return RhoInterval{rho_hat - 1.96 * se, rho_hat + 1.96 * se};
}

iff::IffNode make_interrogator() {
  iff::IffNode node;
  node.id = "uav-a";
  node.allegiance = iff::Allegiance::kFriend;
  node.credential = "code-alpha";
  return node;
}

iff::IffNode make_responder(const std::string& kind) {
  iff::IffNode node;
  node.id = "unknown-node";
  if (kind == "friend") {
    node.allegiance = iff::Allegiance::kFriend;
    node.credential = "code-alpha";
    node.response_payload = "location";
  } else if (kind == "foe") {
    node.allegiance = iff::Allegiance::kFoe;
    node.credential = "code-zulu";
    node.response_payload = "location";
  } else {
    node.allegiance = iff::Allegiance::kUnresponsive;
  }
  return node;
}

}  // namespace

std::vector<TrialRecord> run_trials(const FusionScenario& scenario, int k_max, int trials,
                                    std::uint64_t seed, int workers, int* divergent_trials) {
  if (trials < 1) throw std::invalid_argument("run_trials: trials must be >= 1");
  std::vector<TrialRecord> records(static_cast<std::size_t>(trials));
  std::vector<char> diverged(static_cast<std::size_t>(trials), 0);

  const int n_workers = std::min(resolve_workers(workers), trials);
  std::atomic<int> next{0};
  std::atomic<bool> hard_error{false};
  std::string hard_error_what;
  std::mutex hard_error_mutex;

  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials || hard_error.load()) return;
      try {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        records[static_cast<std::size_t>(i)] = run_fusion_trial(scenario, k_max, rng);
      } catch (const FilterDivergenceError&) {
        diverged[static_cast<std::size_t>(i)] = 1;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(hard_error_mutex);
        hard_error_what = e.what();
        hard_error.store(true);
      }
    }
  };

  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (hard_error.load()) throw ExperimentError("trial failed: " + hard_error_what);

  int n_diverged = 0;
  std::vector<TrialRecord> ok;
  ok.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (diverged[i]) {
      ++n_diverged;
    } else {
      ok.push_back(std::move(records[i]));
    }
  }
  if (divergent_trials) *divergent_trials = n_diverged;
  return ok;
}

Fig6Data compute_fig6(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const FusionScenario scenario = make_fusion_scenario(cfg, cfg.dr_com);
  Fig6Data data;
  const auto records =
      run_trials(scenario, cfg.k_max, cfg.trials, cfg.seed, cfg.workers, &data.divergent_trials);
  if (data.divergent_trials * 100 > cfg.trials)
    throw ExperimentError("fig6: filter divergence rate above 1% (" +
                          std::to_string(data.divergent_trials) + "/" +
                          std::to_string(cfg.trials) + " trials)");
  if (records.size() < 2) throw ExperimentError("fig6: fewer than 2 completed trials");

  data.rows.reserve(static_cast<std::size_t>(cfg.k_max));
  for (int k = 1; k <= cfg.k_max; ++k) {
    const FusionMetrics m = estimate_error_variances(records, k, cfg.dr_com);
    data.rows.push_back(Fig6Row{k, m.dr_rad, m.dr_ekf});
  }

  const double final_ekf = data.rows.back().dr_ekf;
  data.convergence_step = cfg.k_max;
  for (const auto& row : data.rows) {
    if (std::abs(row.dr_ekf - final_ekf) <= 0.05 * final_ekf) {
      data.convergence_step = row.k;
      break;
    }
  }
  return data;
}

Fig7Data compute_fig7(const ScenarioConfig& cfg) {
  validate_config(cfg);
  if (cfg.dr_com_grid.empty()) throw ConfigError("fusion.dr_com_grid: must be non-empty for fig7");
  Fig7Data data;
  data.rows.reserve(cfg.dr_com_grid.size());

  for (const double dr_com : cfg.dr_com_grid) {
    const FusionScenario scenario = make_fusion_scenario(cfg, dr_com);
    int diverged = 0;
    // Same seed for every grid point: common random numbers keep the sweep
    // comparable point to point.
    const auto records =
        run_trials(scenario, cfg.k_max, cfg.trials, cfg.seed, cfg.workers, &diverged);
    if (diverged * 100 > cfg.trials)
      throw ExperimentError("fig7: filter divergence rate above 1% at dr_com = " +
                            format_double(dr_com));
    if (records.size() < 2) throw ExperimentError("fig7: fewer than 2 completed trials");
    const FusionMetrics m = estimate_error_variances(records, cfg.rho_eval_step, dr_com);
    data.rows.push_back(Fig7Row{dr_com, m.rho_s});

    if (std::abs(dr_com - cfg.sigma_m_diag[0]) < 1e-12) {
      data.has_headline = true;
      data.headline_rho_s = m.rho_s;
      std::vector<double> radar, fused;
      radar.reserve(records.size());
      fused.reserve(records.size());
      const std::size_t idx = static_cast<std::size_t>(cfg.rho_eval_step - 1);
      for (const auto& rec : records) {
        radar.push_back(rec.steps[idx].radar_range_error);
        fused.push_back(rec.steps[idx].fused_range_error);
      }
      const RhoInterval ci = jackknife_rho_interval(radar, fused, m.rho_s);
      data.headline_ci_lo = ci.lo;
      data.headline_ci_hi = ci.hi;
    }
  }
  return data;
}

Fig8Data compute_fig8(const ScenarioConfig& cfg) {
  validate_config(cfg);
  if (cfg.t5_grid_ms.empty() || cfg.t7_grid_ms.empty())
    throw ConfigError("iff.t5_grid_ms and iff.t7_grid_ms must be non-empty for fig8");

  const auto to_us = [](double ms) { return static_cast<std::int64_t>(std::llround(ms * 1000.0)); };
  std::vector<std::int64_t> t5_us, t7_us;
  for (double ms : cfg.t5_grid_ms) t5_us.push_back(to_us(ms));
  for (double ms : cfg.t7_grid_ms) t7_us.push_back(to_us(ms));

  const auto closed = iff::sweep_reduction(to_us(cfg.t3_ms), t5_us, t7_us);

  const iff::IffNode interrogator = make_interrogator();
  const iff::IffNode responder = make_responder("friend");

  Fig8Data data;
  data.rows.reserve(closed.size());
  data.peak_rho_t = -1.0;
  for (const auto& point : closed) {
    iff::TimingBudget b;
    b.t3_us = to_us(cfg.t3_ms);
    b.t5_us = point.t5_us;
    b.t7_us = point.t7_us;
    const auto sep = iff::simulate_exchange(iff::PipelineVariant::kSeparated, b, interrogator,
                                            responder);
    const auto isac =
        iff::simulate_exchange(iff::PipelineVariant::kIsac, b, interrogator, responder);
    const double rho_des = static_cast<double>(sep.makespan_us - isac.makespan_us) /
                           static_cast<double>(sep.makespan_us);
    if (rho_des != point.rho_t)
      throw ExperimentError("fig8: discrete-event and closed-form reduction ratios disagree at "
                            "t5 = " + format_double(iff::to_ms(point.t5_us)) + " ms, t7 = " +
                            format_double(iff::to_ms(point.t7_us)) + " ms");
    data.rows.push_back(Fig8Row{iff::to_ms(point.t5_us), iff::to_ms(point.t7_us), point.rho_t,
                                rho_des});
    if (point.rho_t > data.peak_rho_t) {
      data.peak_rho_t = point.rho_t;
      data.peak_t5_ms = iff::to_ms(point.t5_us);
      data.peak_t7_ms = iff::to_ms(point.t7_us);
    }
  }
  return data;
}

EncounterData compute_encounter(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const iff::TimingBudget budget = make_timing_budget(cfg);
  const iff::IffNode interrogator = make_interrogator();
  const iff::IffNode responder = make_responder(cfg.responder);

  EncounterData data;
  data.separated_trace =
      iff::simulate_exchange(iff::PipelineVariant::kSeparated, budget, interrogator, responder);
  data.isac_trace =
      iff::simulate_exchange(iff::PipelineVariant::kIsac, budget, interrogator, responder);
  data.verdict = data.isac_trace.verdict;
  const auto totals = iff::total_identification_time(budget, cfg.interactions);
  data.separated_total_us = totals.separated_us;
  data.isac_total_us = totals.isac_us;
  data.rho_t = iff::time_reduction_ratio(budget);

  // Sensing runs regardless of the verdict; only the response payload is
  // allegiance-dependent.
  const FusionScenario scenario = make_fusion_scenario(cfg, cfg.dr_com);
  RngStream rng(cfg.seed, 0);
  const TrialRecord trial = run_fusion_trial(scenario, cfg.k_max, rng);
  data.tracking_ran = true;
  data.final_fused_range_error_m = trial.steps.back().fused_range_error;
  data.final_fused_position_error_m = trial.steps.back().fused_position_error;
  return data;
}

ExperimentReport run_fig6(const ScenarioConfig& cfg, const std::string& out_dir) {
  Stopwatch watch;
  const Fig6Data data = compute_fig6(cfg);
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "fig6.csv").string();
  {
    auto os = open_csv(csv_path);
    os << "k,dr_rad,dr_ekf\n";
    for (const auto& row : data.rows)
      os << row.k << ',' << format_double(row.dr_rad) << ',' << format_double(row.dr_ekf) << '\n';
  }
  require_nonempty_file(csv_path);

  ExperimentReport report;
  report.name = "fig6";
  report.parameters = {{"trials", std::to_string(cfg.trials)},
                       {"k_max", std::to_string(cfg.k_max)},
                       {"dt_s", format_double(cfg.dt_s)},
                       {"dr_com", format_double(cfg.dr_com)},
                       {"seed", std::to_string(cfg.seed)}};
  report.csv_paths = {csv_path};
  report.summary = {{"convergence_step", std::to_string(data.convergence_step)},
                    {"divergent_trials", std::to_string(data.divergent_trials)},
                    {"dr_rad_final", format_double(data.rows.back().dr_rad)},
                    {"dr_ekf_final", format_double(data.rows.back().dr_ekf)}};
  report.wall_seconds = watch.seconds();
  return report;
}

ExperimentReport run_fig7(const ScenarioConfig& cfg, const std::string& out_dir) {
  Stopwatch watch;
  const Fig7Data data = compute_fig7(cfg);
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "fig7.csv").string();
  {
    auto os = open_csv(csv_path);
    os << "dr_com,rho_s\n";
    for (const auto& row : data.rows)
      os << format_double(row.dr_com) << ',' << format_double(row.rho_s) << '\n';
  }
  require_nonempty_file(csv_path);

  ExperimentReport report;
  report.name = "fig7";
  report.parameters = {{"trials", std::to_string(cfg.trials)},
                       {"rho_eval_step", std::to_string(cfg.rho_eval_step)},
                       {"dt_s", format_double(cfg.dt_s)},
                       {"seed", std::to_string(cfg.seed)}};
  report.csv_paths = {csv_path};
  if (data.has_headline) {
    report.summary.push_back({"rho_s_at_dr_com_eq_dr_rad", format_double(data.headline_rho_s)});
    report.summary.push_back({"rho_s_ci95_lo", format_double(data.headline_ci_lo)});
    report.summary.push_back({"rho_s_ci95_hi", format_double(data.headline_ci_hi)});
  }
  report.wall_seconds = watch.seconds();
  return report;
}

ExperimentReport run_fig8(const ScenarioConfig& cfg, const std::string& out_dir) {
  Stopwatch watch;
  const Fig8Data data = compute_fig8(cfg);
  fs::create_directories(out_dir);
  const std::string csv_path = (fs::path(out_dir) / "fig8.csv").string();
  {
    auto os = open_csv(csv_path);
    os << "t5_ms,t7_ms,rho_t_closed,rho_t_des\n";
    for (const auto& row : data.rows)
      os << format_double(row.t5_ms) << ',' << format_double(row.t7_ms) << ','
         << format_double(row.rho_t_closed) << ',' << format_double(row.rho_t_des) << '\n';
  }
  require_nonempty_file(csv_path);

  ExperimentReport report;
  report.name = "fig8";
  report.parameters = {{"t3_ms", format_double(cfg.t3_ms)},
                       {"t5_grid_size", std::to_string(cfg.t5_grid_ms.size())},
                       {"t7_grid_size", std::to_string(cfg.t7_grid_ms.size())}};
  report.csv_paths = {csv_path};
  report.summary = {{"peak_rho_t", format_double(data.peak_rho_t)},
                    {"peak_t5_ms", format_double(data.peak_t5_ms)},
                    {"peak_t7_ms", format_double(data.peak_t7_ms)}};
  report.wall_seconds = watch.seconds();
  return report;
}

ExperimentReport run_encounter(const ScenarioConfig& cfg, const std::string& out_dir) {
  Stopwatch watch;
  const EncounterData data = compute_encounter(cfg);
  fs::create_directories(out_dir);
  const std::string sep_path = (fs::path(out_dir) / "encounter_trace_separated.csv").string();
  const std::string isac_path = (fs::path(out_dir) / "encounter_trace_isac.csv").string();
  {
    auto os = open_csv(sep_path);
    iff::write_trace_csv(data.separated_trace, os);
  }
  {
    auto os = open_csv(isac_path);
    iff::write_trace_csv(data.isac_trace, os);
  }
  require_nonempty_file(sep_path);
  require_nonempty_file(isac_path);

  ExperimentReport report;
  report.name = "encounter";
  report.parameters = {{"responder", cfg.responder},
                       {"interactions", std::to_string(cfg.interactions)},
                       {"seed", std::to_string(cfg.seed)}};
  report.csv_paths = {sep_path, isac_path};
  report.summary = {
      {"verdict", iff::to_string(data.verdict)},
      {"separated_iff_ms", format_double(iff::to_ms(data.separated_trace.makespan_us))},
      {"isac_iff_ms", format_double(iff::to_ms(data.isac_trace.makespan_us))},
      {"separated_total_ms", format_double(iff::to_ms(data.separated_total_us))},
      {"isac_total_ms", format_double(iff::to_ms(data.isac_total_us))},
      {"rho_t", format_double(data.rho_t)},
      {"final_fused_range_error_m", format_double(data.final_fused_range_error_m)},
      {"final_fused_position_error_m", format_double(data.final_fused_position_error_m)},
  };
  report.wall_seconds = watch.seconds();
  return report;
}

std::vector<ExperimentReport> run_all(const ScenarioConfig& cfg, const std::string& out_dir) {
  std::vector<ExperimentReport> reports;
  reports.push_back(run_fig6(cfg, out_dir));
  reports.push_back(run_fig7(cfg, out_dir));
  reports.push_back(run_fig8(cfg, out_dir));
  reports.push_back(run_encounter(cfg, out_dir));
  return reports;
}

void write_summary(const std::vector<ExperimentReport>& reports, std::ostream& os) {
  for (const auto& report : reports) {
    os << "[" << report.name << "]\n";
    for (const auto& [key, value] : report.parameters) os << "param." << key << " = " << value << "\n";
    for (const auto& path : report.csv_paths) os << "csv = " << path << "\n";
    for (const auto& [key, value] : report.summary) os << key << " = " << value << "\n";
    os << "wall_seconds = " << format_double(report.wall_seconds) << "\n\n";
  }
}

}  // namespace isacsim
