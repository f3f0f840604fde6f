#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "isacsim/fusion.hpp"
#include "isacsim/iff.hpp"
#include "isacsim/kinematics.hpp"

namespace isacsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One vehicle's motion parameters as they appear in the config file
/// (angular quantities in degrees; converted to radians when the core
/// motion profile is built).
struct VehicleConfig {
  double speed_mps{25.0};
  double accel_mps2{5.0};
  double angular_speed_degps{150.0};
  double heading_deg{5.0};
  std::vector<ManeuverInterval> schedule;

  bool operator==(const VehicleConfig&) const = default;
};

/// Full simulation configuration. Field defaults are the standard operating
/// point; everything is overridable from a config file and the CLI.
struct ScenarioConfig {
  VehicleConfig observer;
  VehicleConfig target;

  // fusion experiment
  double dt_s{1.25};
  int k_max{30};
  double initial_separation_m{1000.0};
  double initial_bearing_deg{0.0};
  std::array<double, 2> sigma_m_diag{10.0, 0.01};
  std::array<double, 4> sigma_s_vel_acc{1.0, 1.0, 0.1, 0.1};
  double dr_com{10.0};
  std::vector<double> dr_com_grid{1, 2, 5, 10, 20, 50, 100};
  int rho_eval_step{20};
  std::string init{"from_measurement"};  // or "truth" (perfect initialization)

  // iff timing
  double t1_ms{0.0};
  double t2_ms{0.0};
  double t3_ms{10.0};
  double t4_ms{0.0};
  double t5_ms{10.0};
  double t6_ms{0.0};
  double t7_ms{5.0};
  std::vector<double> t5_grid_ms;  // default 0..20 step 1, set in constructor
  std::vector<double> t7_grid_ms{0, 5, 10, 20};
  int interactions{20};
  std::string responder{"friend"};

  // run control
  int trials{500};
  std::uint64_t seed{42};
  int workers{0};  // 0 selects hardware concurrency
  std::string out_dir{"out"};

  ScenarioConfig() {
    for (int t5 = 0; t5 <= 20; ++t5) t5_grid_ms.push_back(static_cast<double>(t5));
  }

  bool operator==(const ScenarioConfig&) const = default;
};

/// Validates cross-field constraints; throws ConfigError naming the field.
void validate_config(const ScenarioConfig& cfg);

/// Parses a config file on top of the defaults. Unknown sections or keys are
/// rejected with file/line context.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(std::string_view text, const std::string& origin);

/// Writes a config that parse_config reads back field-for-field.
void write_config(const ScenarioConfig& cfg, std::ostream& os);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

MotionProfile<double> make_motion_profile(const VehicleConfig& v);

/// Builds the per-trial scenario; dr_com fills the position entries of the
/// prediction-step covariance.
FusionScenario make_fusion_scenario(const ScenarioConfig& cfg, double dr_com);

iff::TimingBudget make_timing_budget(const ScenarioConfig& cfg);

}  // namespace isacsim
