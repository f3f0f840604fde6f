#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace {

// Exit codes: 0 success, 2 configuration/usage error, 3 experiment failure.
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitExperimentError = 3;

struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  std::string out_dir;
};

isacsim::ScenarioConfig load_config(const CliOverrides& cli) {
  isacsim::ScenarioConfig cfg;
  if (!cli.config_path.empty()) cfg = isacsim::parse_config(cli.config_path);
  // Precedence: CLI flag, then ISACSIM_OUT, then config file, then default.
  if (const char* env_out = std::getenv("ISACSIM_OUT"); env_out && *env_out)
    cfg.out_dir = env_out;
  if (!cli.out_dir.empty()) cfg.out_dir = cli.out_dir;
  if (cli.seed) cfg.seed = *cli.seed;
  if (cli.trials) cfg.trials = *cli.trials;
  if (cli.workers) cfg.workers = *cli.workers;
  isacsim::validate_config(cfg);
  return cfg;
}

void print_report(const isacsim::ExperimentReport& report) {
  std::cout << report.name << ": done in " << report.wall_seconds << " s\n";
  for (const auto& path : report.csv_paths) std::cout << "  wrote " << path << "\n";
  for (const auto& [key, value] : report.summary)
    std::cout << "  " << key << " = " << value << "\n";
}

void write_summary_file(const std::vector<isacsim::ExperimentReport>& reports,
                        const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / "summary.txt";
  std::ofstream os(path, std::ios::binary);
  isacsim::write_summary(reports, os);
  std::cout << "  wrote " << path.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV ISAC simulator: EKF fusion of radar and communicated location, "
               "and serial-vs-parallel IFF timing"};
  app.require_subcommand(1);

  CliOverrides cli;
  app.add_option("--config", cli.config_path, "Config file (defaults used when omitted)");
  app.add_option("--seed", cli.seed, "Master seed override");
  app.add_option("--trials", cli.trials, "Monte Carlo trial count override");
  app.add_option("--workers", cli.workers, "Worker thread count (0 = hardware)");
  app.add_option("--out", cli.out_dir, "Output directory override");

  auto* fig6 = app.add_subcommand("fig6", "Fused vs radar range-error variance over iterations");
  auto* fig7 = app.add_subcommand("fig7", "Sensing improvement ratio over dr_com sweep");
  auto* fig8 = app.add_subcommand("fig8", "IFF time reduction ratio over t5/t7 grid");
  auto* encounter = app.add_subcommand("encounter", "Single end-to-end IFF + tracking encounter");
  auto* all = app.add_subcommand("all", "Run every experiment");
  for (auto* sub : {fig6, fig7, fig8, encounter, all}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    const isacsim::ScenarioConfig cfg = load_config(cli);
    std::vector<isacsim::ExperimentReport> reports;
    if (fig6->parsed()) reports.push_back(isacsim::run_fig6(cfg, cfg.out_dir));
    if (fig7->parsed()) reports.push_back(isacsim::run_fig7(cfg, cfg.out_dir));
    if (fig8->parsed()) reports.push_back(isacsim::run_fig8(cfg, cfg.out_dir));
    if (encounter->parsed()) reports.push_back(isacsim::run_encounter(cfg, cfg.out_dir));
    if (all->parsed()) reports = isacsim::run_all(cfg, cfg.out_dir);

    for (const auto& report : reports) print_report(report);
    write_summary_file(reports, cfg.out_dir);
    return kExitOk;
  } catch (const isacsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const isacsim::ExperimentError& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return kExitExperimentError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitExperimentError;
  }
}
