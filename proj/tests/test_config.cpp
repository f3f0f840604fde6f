#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "config.hpp"

using namespace isacsim;

TEST_CASE("empty config text yields the full default configuration") {
  const ScenarioConfig cfg = parse_config_text("", "empty");
  const ScenarioConfig defaults;
  CHECK(cfg == defaults);

  CHECK(cfg.observer.speed_mps == 25.0);
  CHECK(cfg.target.speed_mps == 25.0);
  CHECK(cfg.observer.accel_mps2 == 5.0);
  CHECK(cfg.observer.angular_speed_degps == 150.0);
  CHECK(cfg.observer.heading_deg == 5.0);
  CHECK(cfg.target.heading_deg == 5.0);
  CHECK(cfg.sigma_m_diag[0] == 10.0);
  CHECK(cfg.sigma_m_diag[1] == 0.01);
  CHECK(cfg.sigma_s_vel_acc == std::array<double, 4>{1.0, 1.0, 0.1, 0.1});
  CHECK(cfg.t3_ms == 10.0);
  REQUIRE(cfg.t5_grid_ms.size() == 21);
  CHECK(cfg.t5_grid_ms.front() == 0.0);
  CHECK(cfg.t5_grid_ms.back() == 20.0);
  CHECK(cfg.t7_grid_ms == std::vector<double>{0, 5, 10, 20});
  CHECK(cfg.trials == 500);
}

TEST_CASE("comments and blank lines are ignored") {
  const ScenarioConfig cfg = parse_config_text(
      "# leading comment\n"
      "\n"
      "[run]\n"
      "trials = 12   # trailing comment\n",
      "text");
  CHECK(cfg.trials == 12);
}

TEST_CASE("unknown keys and sections are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\nbogus = 1\n", "cfg"),
                       doctest::Contains("unknown key 'bogus'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[nonsense]\ntrials = 1\n", "cfg"),
                       doctest::Contains("unknown section [nonsense]"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("trials = 1\n", "cfg"),
                       doctest::Contains("outside of any [section]"), ConfigError);
}

TEST_CASE("validation failures name the offending field") {
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\ntrials = 0\n", "cfg"),
                       doctest::Contains("run.trials"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[fusion]\ndt_s = 0\n", "cfg"),
                       doctest::Contains("fusion.dt_s"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[fusion]\nrho_eval_step = 99\n", "cfg"),
                       doctest::Contains("fusion.rho_eval_step"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[iff]\nresponder = martian\n", "cfg"),
                       doctest::Contains("iff.responder"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[iff]\nt3_ms = -1\n", "cfg"),
                       doctest::Contains("t*_ms"), ConfigError);
}

TEST_CASE("malformed lines carry file and line context") {
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\ntrials\n", "my.cfg"),
                       doctest::Contains("my.cfg:2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[run\ntrials = 1\n", "my.cfg"),
                       doctest::Contains("my.cfg:1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[run]\ntrials = abc\n", "my.cfg"),
                       doctest::Contains("expected an integer"), ConfigError);
}

TEST_CASE("grids accept both comma lists and range syntax") {
  const ScenarioConfig cfg = parse_config_text(
      "[iff]\n"
      "t5_grid_ms = 0:6:2\n"
      "t7_grid_ms = 1, 3, 9\n",
      "cfg");
  CHECK(cfg.t5_grid_ms == std::vector<double>{0, 2, 4, 6});
  CHECK(cfg.t7_grid_ms == std::vector<double>{1, 3, 9});
}

TEST_CASE("maneuver schedules parse and validate") {
  const ScenarioConfig cfg = parse_config_text(
      "[target]\n"
      "schedule = 2:5:left, 8:10:right\n",
      "cfg");
  REQUIRE(cfg.target.schedule.size() == 2);
  CHECK(cfg.target.schedule[0].begin_step == 2);
  CHECK(cfg.target.schedule[0].end_step == 5);
  CHECK(cfg.target.schedule[0].turn == TurnDirection::kLeft);
  CHECK(cfg.target.schedule[1].turn == TurnDirection::kRight);

  CHECK_THROWS_AS(parse_config_text("[target]\nschedule = 5:2:left\n", "cfg"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[target]\nschedule = 2:5:sideways\n", "cfg"), ConfigError);
}

TEST_CASE("write-then-parse round trip preserves every field") {
  ScenarioConfig cfg;
  cfg.observer.speed_mps = 17.25;
  cfg.observer.heading_deg = -12.5;
  cfg.observer.schedule = {{3, 7, TurnDirection::kLeft}};
  cfg.target.angular_speed_degps = 33.3;
  cfg.target.schedule = {{0, 2, TurnDirection::kRight}, {4, 5, TurnDirection::kStraight}};
  cfg.dt_s = 0.05;
  cfg.k_max = 42;
  cfg.initial_separation_m = 1234.5;
  cfg.initial_bearing_deg = 30.0;
  cfg.sigma_m_diag = {3.5, 0.002};
  cfg.sigma_s_vel_acc = {2, 2, 0.25, 0.25};
  cfg.dr_com = 7.5;
  cfg.dr_com_grid = {0.5, 7.5, 75};
  cfg.rho_eval_step = 21;
  cfg.init = "truth";
  cfg.t1_ms = 0.25;
  cfg.t5_ms = 12.0;
  cfg.t5_grid_ms = {0, 1.5, 3};
  cfg.t7_grid_ms = {2};
  cfg.interactions = 7;
  cfg.responder = "foe";
  cfg.trials = 77;
  cfg.seed = 987654321;
  cfg.workers = 3;
  cfg.out_dir = "results/run1";

  std::ostringstream os;
  write_config(cfg, os);
  const ScenarioConfig back = parse_config_text(os.str(), "roundtrip");
  CHECK(back == cfg);
}

TEST_CASE("angular fields convert to radians when profiles are built") {
  ScenarioConfig cfg;
  cfg.observer.heading_deg = 90.0;
  cfg.observer.angular_speed_degps = 180.0;
  const auto profile = make_motion_profile(cfg.observer);
  CHECK(profile.initial_heading == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(profile.angular_speed == doctest::Approx(kPi).epsilon(1e-15));
}

TEST_CASE("fusion scenario assembly places vehicles by separation and bearing") {
  ScenarioConfig cfg;
  cfg.initial_separation_m = 500.0;
  cfg.initial_bearing_deg = 90.0;
  cfg.observer.heading_deg = 0.0;
  cfg.target.heading_deg = 0.0;
  cfg.dr_com = 4.0;
  const FusionScenario sc = make_fusion_scenario(cfg, cfg.dr_com);

  CHECK(sc.observer_start.x == 0.0);
  CHECK(sc.observer_start.vx == doctest::Approx(25.0));
  CHECK(sc.target_start.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sc.target_start.y == doctest::Approx(500.0));
  CHECK(sc.sigma_s(0, 0) == 4.0);
  CHECK(sc.sigma_s(1, 1) == 4.0);
  CHECK(sc.sigma_s(2, 2) == 1.0);
  CHECK(sc.sigma_s(5, 5) == 0.1);
  CHECK(sc.sigma_m(0, 0) == 10.0);
  CHECK(sc.sigma_m(1, 1) == 0.01);
}

TEST_CASE("timing budget assembly converts milliseconds to microseconds") {
  ScenarioConfig cfg;
  cfg.t1_ms = 1.5;
  cfg.t3_ms = 10.0;
  const auto b = make_timing_budget(cfg);
  CHECK(b.t1_us == 1500);
  CHECK(b.t3_us == 10000);
  CHECK(b.t5_us == 10000);
}

TEST_CASE("missing config files are reported") {
  CHECK_THROWS_WITH_AS(parse_config("/nonexistent/path.cfg"),
                       doctest::Contains("cannot open"), ConfigError);
}
