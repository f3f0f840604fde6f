#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"
#include "isacsim/fusion.hpp"
#include "isacsim/iff_exchange.hpp"

namespace isacsim {

/// An experiment that ran but produced results violating its own contract
/// (divergence rate, closed-form/discrete-event mismatch, ...).
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<std::string> csv_paths;
  std::vector<std::pair<std::string, std::string>> summary;
  double wall_seconds{0};
};

/// Runs `trials` independent fusion trials, one RNG stream per trial derived
/// from (seed, trial index); results do not depend on worker count. Trials
/// whose filter diverges are dropped and counted into *divergent_trials.
std::vector<TrialRecord> run_trials(const FusionScenario& scenario, int k_max, int trials,
                                    std::uint64_t seed, int workers,
                                    int* divergent_trials = nullptr);

struct Fig6Row {
  int k{0};
  double dr_rad{0};
  double dr_ekf{0};
};
struct Fig6Data {
  std::vector<Fig6Row> rows;
  int divergent_trials{0};
  int convergence_step{0};  // first k with dr_ekf within 5% of its final value
};
Fig6Data compute_fig6(const ScenarioConfig& cfg);

struct Fig7Row {
  double dr_com{0};
  double rho_s{0};
};
struct Fig7Data {
  std::vector<Fig7Row> rows;
  bool has_headline{false};  // grid contained dr_com == sigma_m range variance
  double headline_rho_s{0};
  double headline_ci_lo{0};  // 95% jackknife confidence interval
  double headline_ci_hi{0};
};
Fig7Data compute_fig7(const ScenarioConfig& cfg);

struct Fig8Row {
  double t5_ms{0};
  double t7_ms{0};
  double rho_t_closed{0};
  double rho_t_des{0};
};
struct Fig8Data {
  std::vector<Fig8Row> rows;
  double peak_rho_t{0};
  double peak_t5_ms{0};
  double peak_t7_ms{0};
};
Fig8Data compute_fig8(const ScenarioConfig& cfg);

struct EncounterData {
  iff::Verdict verdict{iff::Verdict::kNoResponse};
  iff::ExchangeTrace separated_trace;
  iff::ExchangeTrace isac_trace;
  std::int64_t separated_total_us{0};
  std::int64_t isac_total_us{0};
  double rho_t{0};
  bool tracking_ran{false};
  double final_fused_range_error_m{0};
  double final_fused_position_error_m{0};
};
EncounterData compute_encounter(const ScenarioConfig& cfg);

ExperimentReport run_fig6(const ScenarioConfig& cfg, const std::string& out_dir);
ExperimentReport run_fig7(const ScenarioConfig& cfg, const std::string& out_dir);
ExperimentReport run_fig8(const ScenarioConfig& cfg, const std::string& out_dir);
ExperimentReport run_encounter(const ScenarioConfig& cfg, const std::string& out_dir);
std::vector<ExperimentReport> run_all(const ScenarioConfig& cfg, const std::string& out_dir);

void write_summary(const std::vector<ExperimentReport>& reports, std::ostream& os);

}  // namespace isacsim
