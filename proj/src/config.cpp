#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace isacsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      parts.push_back(trim(s.substr(pos)));
      break;
    }
    parts.push_back(trim(s.substr(pos, next - pos)));
    pos = next + 1;
  }
  return parts;
}

double parse_double(std::string_view s, const std::string& where) {
  double v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(where + ": expected a number, got '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, const std::string& where) {
  std::int64_t v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(where + ": expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& where) {
  std::uint64_t v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(where + ": expected an unsigned integer, got '" + std::string(s) + "'");
  return v;
}

/// Grid values: either a comma list "0, 5, 10" or a range "start:stop:step"
/// (inclusive stop).
std::vector<double> parse_grid(std::string_view s, const std::string& where) {
  std::vector<double> grid;
  if (s.find(':') != std::string_view::npos && s.find(',') == std::string_view::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError(where + ": range must be start:stop:step");
    const double start = parse_double(parts[0], where);
    const double stop = parse_double(parts[1], where);
    const double step = parse_double(parts[2], where);
    if (!(step > 0) || stop < start)
      throw ConfigError(where + ": range requires step > 0 and stop >= start");
    for (double v = start; v <= stop + 1e-12 * std::max(1.0, std::abs(stop)); v += step)
      grid.push_back(v);
    return grid;
  }
  for (const auto part : split(s, ',')) {
    if (part.empty()) throw ConfigError(where + ": empty list element");
    grid.push_back(parse_double(part, where));
  }
  return grid;
}

/// Maneuver schedule entries "begin:end:left|right|straight", comma
/// separated; an empty value clears the schedule.
std::vector<ManeuverInterval> parse_schedule(std::string_view s, const std::string& where) {
  std::vector<ManeuverInterval> schedule;
  if (trim(s).empty()) return schedule;
  for (const auto entry : split(s, ',')) {
    const auto fields = split(entry, ':');
    if (fields.size() != 3)
      throw ConfigError(where + ": schedule entry must be begin:end:direction");
    ManeuverInterval iv;
    iv.begin_step = static_cast<int>(parse_int(fields[0], where));
    iv.end_step = static_cast<int>(parse_int(fields[1], where));
    if (fields[2] == "left") {
      iv.turn = TurnDirection::kLeft;
    } else if (fields[2] == "right") {
      iv.turn = TurnDirection::kRight;
    } else if (fields[2] == "straight") {
      iv.turn = TurnDirection::kStraight;
    } else {
      throw ConfigError(where + ": direction must be left, right or straight");
    }
    schedule.push_back(iv);
  }
  return schedule;
}

std::string schedule_to_string(const std::vector<ManeuverInterval>& schedule) {
  std::string out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(schedule[i].begin_step) + ":" + std::to_string(schedule[i].end_step) + ":";
    switch (schedule[i].turn) {
      case TurnDirection::kLeft: out += "left"; break;
      case TurnDirection::kRight: out += "right"; break;
      case TurnDirection::kStraight: out += "straight"; break;
    }
  }
  return out;
}

std::string grid_to_string(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out += ", ";
    out += format_double(grid[i]);
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, const std::string&)>;

void apply_vehicle_key(VehicleConfig& v, std::string_view key, std::string_view value,
                       const std::string& where) {
  if (key == "speed_mps") {
    v.speed_mps = parse_double(value, where);
  } else if (key == "accel_mps2") {
    v.accel_mps2 = parse_double(value, where);
  } else if (key == "angular_speed_degps") {
    v.angular_speed_degps = parse_double(value, where);
  } else if (key == "heading_deg") {
    v.heading_deg = parse_double(value, where);
  } else if (key == "schedule") {
    v.schedule = parse_schedule(value, where);
  } else {
    throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
  }
}

void apply_key(ScenarioConfig& cfg, const std::string& section, std::string_view key,
               std::string_view value, const std::string& where) {
  if (section == "observer") {
    apply_vehicle_key(cfg.observer, key, value, where);
    return;
  }
  if (section == "target") {
    apply_vehicle_key(cfg.target, key, value, where);
    return;
  }
  if (section == "fusion") {
    if (key == "dt_s") cfg.dt_s = parse_double(value, where);
    else if (key == "k_max") cfg.k_max = static_cast<int>(parse_int(value, where));
    else if (key == "initial_separation_m") cfg.initial_separation_m = parse_double(value, where);
    else if (key == "initial_bearing_deg") cfg.initial_bearing_deg = parse_double(value, where);
    else if (key == "sigma_m_diag") {
      const auto g = parse_grid(value, where);
      if (g.size() != 2) throw ConfigError(where + ": sigma_m_diag needs 2 entries");
      cfg.sigma_m_diag = {g[0], g[1]};
    } else if (key == "sigma_s_vel_acc") {
      const auto g = parse_grid(value, where);
      if (g.size() != 4) throw ConfigError(where + ": sigma_s_vel_acc needs 4 entries");
      cfg.sigma_s_vel_acc = {g[0], g[1], g[2], g[3]};
    } else if (key == "dr_com") cfg.dr_com = parse_double(value, where);
    else if (key == "dr_com_grid") cfg.dr_com_grid = parse_grid(value, where);
    else if (key == "rho_eval_step") cfg.rho_eval_step = static_cast<int>(parse_int(value, where));
    else if (key == "init") cfg.init = std::string(trim(value));
    else throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    return;
  }
  if (section == "iff") {
    if (key == "t1_ms") cfg.t1_ms = parse_double(value, where);
    else if (key == "t2_ms") cfg.t2_ms = parse_double(value, where);
    else if (key == "t3_ms") cfg.t3_ms = parse_double(value, where);
    else if (key == "t4_ms") cfg.t4_ms = parse_double(value, where);
    else if (key == "t5_ms") cfg.t5_ms = parse_double(value, where);
    else if (key == "t6_ms") cfg.t6_ms = parse_double(value, where);
    else if (key == "t7_ms") cfg.t7_ms = parse_double(value, where);
    else if (key == "t5_grid_ms") cfg.t5_grid_ms = parse_grid(value, where);
    else if (key == "t7_grid_ms") cfg.t7_grid_ms = parse_grid(value, where);
    else if (key == "interactions") cfg.interactions = static_cast<int>(parse_int(value, where));
    else if (key == "responder") cfg.responder = std::string(trim(value));
    else throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    return;
  }
  if (section == "run") {
    if (key == "trials") cfg.trials = static_cast<int>(parse_int(value, where));
    else if (key == "seed") cfg.seed = parse_uint(value, where);
    else if (key == "workers") cfg.workers = static_cast<int>(parse_int(value, where));
    else if (key == "out_dir") cfg.out_dir = std::string(trim(value));
    else throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
    return;
  }
  throw ConfigError(where + ": unknown section [" + section + "]");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

ScenarioConfig parse_config_text(std::string_view text, const std::string& origin) {
  ScenarioConfig cfg;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = text.find('\n', pos);
    std::string_view line = next == std::string_view::npos ? text.substr(pos)
                                                           : text.substr(pos, next - pos);
    pos = next == std::string_view::npos ? text.size() + 1 : next + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = origin + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty()) throw ConfigError(where + ": key outside of any [section]");
    apply_key(cfg, section, key, value, where);
  }
  validate_config(cfg);
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

void validate_config(const ScenarioConfig& cfg) {
  const auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const auto check_vehicle = [&](const VehicleConfig& v, const std::string& name) {
    require(v.speed_mps >= 0 && std::isfinite(v.speed_mps), name + ".speed_mps: must be >= 0");
    require(std::isfinite(v.accel_mps2), name + ".accel_mps2: must be finite");
    require(v.angular_speed_degps >= 0 && std::isfinite(v.angular_speed_degps),
            name + ".angular_speed_degps: must be >= 0");
    require(std::isfinite(v.heading_deg), name + ".heading_deg: must be finite");
    try {
      validate_profile(make_motion_profile(v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(name + ".schedule: " + e.what());
    }
  };
  check_vehicle(cfg.observer, "observer");
  check_vehicle(cfg.target, "target");

  require(cfg.dt_s > 0 && std::isfinite(cfg.dt_s), "fusion.dt_s: must be > 0");
  require(cfg.k_max >= 1, "fusion.k_max: must be >= 1");
  require(cfg.initial_separation_m > 0, "fusion.initial_separation_m: must be > 0");
  require(std::isfinite(cfg.initial_bearing_deg), "fusion.initial_bearing_deg: must be finite");
  require(cfg.sigma_m_diag[0] >= 0 && cfg.sigma_m_diag[1] >= 0,
          "fusion.sigma_m_diag: entries must be >= 0");
  for (double v : cfg.sigma_s_vel_acc)
    require(v >= 0, "fusion.sigma_s_vel_acc: entries must be >= 0");
  require(cfg.dr_com >= 0, "fusion.dr_com: must be >= 0");
  for (double v : cfg.dr_com_grid) require(v >= 0, "fusion.dr_com_grid: entries must be >= 0");
  require(cfg.rho_eval_step >= 1 && cfg.rho_eval_step <= cfg.k_max,
          "fusion.rho_eval_step: must be in [1, k_max]");
  require(cfg.init == "from_measurement" || cfg.init == "truth",
          "fusion.init: must be from_measurement or truth");

  for (double t : {cfg.t1_ms, cfg.t2_ms, cfg.t3_ms, cfg.t4_ms, cfg.t5_ms, cfg.t6_ms, cfg.t7_ms})
    require(t >= 0 && std::isfinite(t), "iff.t*_ms: stage times must be >= 0");
  for (double t : cfg.t5_grid_ms) require(t >= 0, "iff.t5_grid_ms: entries must be >= 0");
  for (double t : cfg.t7_grid_ms) require(t >= 0, "iff.t7_grid_ms: entries must be >= 0");
  require(cfg.interactions >= 1, "iff.interactions: must be >= 1");
  require(cfg.responder == "friend" || cfg.responder == "foe" || cfg.responder == "unresponsive",
          "iff.responder: must be friend, foe or unresponsive");

  require(cfg.trials >= 1, "run.trials: must be >= 1");
  require(cfg.workers >= 0, "run.workers: must be >= 0");
}

void write_config(const ScenarioConfig& cfg, std::ostream& os) {
  const auto vehicle = [&](const char* name, const VehicleConfig& v) {
    os << "[" << name << "]\n";
    os << "speed_mps = " << format_double(v.speed_mps) << "\n";
    os << "accel_mps2 = " << format_double(v.accel_mps2) << "\n";
    os << "angular_speed_degps = " << format_double(v.angular_speed_degps) << "\n";
    os << "heading_deg = " << format_double(v.heading_deg) << "\n";
    os << "schedule = " << schedule_to_string(v.schedule) << "\n\n";
  };
  vehicle("observer", cfg.observer);
  vehicle("target", cfg.target);

  os << "[fusion]\n";
  os << "dt_s = " << format_double(cfg.dt_s) << "\n";
  os << "k_max = " << cfg.k_max << "\n";
  os << "initial_separation_m = " << format_double(cfg.initial_separation_m) << "\n";
  os << "initial_bearing_deg = " << format_double(cfg.initial_bearing_deg) << "\n";
  os << "sigma_m_diag = " << format_double(cfg.sigma_m_diag[0]) << ", "
     << format_double(cfg.sigma_m_diag[1]) << "\n";
  os << "sigma_s_vel_acc = " << format_double(cfg.sigma_s_vel_acc[0]) << ", "
     << format_double(cfg.sigma_s_vel_acc[1]) << ", " << format_double(cfg.sigma_s_vel_acc[2])
     << ", " << format_double(cfg.sigma_s_vel_acc[3]) << "\n";
  os << "dr_com = " << format_double(cfg.dr_com) << "\n";
  os << "dr_com_grid = " << grid_to_string(cfg.dr_com_grid) << "\n";
  os << "rho_eval_step = " << cfg.rho_eval_step << "\n";
  os << "init = " << cfg.init << "\n\n";

  os << "[iff]\n";
  os << "t1_ms = " << format_double(cfg.t1_ms) << "\n";
  os << "t2_ms = " << format_double(cfg.t2_ms) << "\n";
  os << "t3_ms = " << format_double(cfg.t3_ms) << "\n";
  os << "t4_ms = " << format_double(cfg.t4_ms) << "\n";
  os << "t5_ms = " << format_double(cfg.t5_ms) << "\n";
  os << "t6_ms = " << format_double(cfg.t6_ms) << "\n";
  os << "t7_ms = " << format_double(cfg.t7_ms) << "\n";
  os << "t5_grid_ms = " << grid_to_string(cfg.t5_grid_ms) << "\n";
  os << "t7_grid_ms = " << grid_to_string(cfg.t7_grid_ms) << "\n";
  os << "interactions = " << cfg.interactions << "\n";
  os << "responder = " << cfg.responder << "\n\n";

  os << "[run]\n";
  os << "trials = " << cfg.trials << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "workers = " << cfg.workers << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
}

MotionProfile<double> make_motion_profile(const VehicleConfig& v) {
  MotionProfile<double> p;
  p.speed = v.speed_mps;
  p.acceleration = v.accel_mps2;
  p.angular_speed = deg_to_rad(v.angular_speed_degps);
  p.initial_heading = deg_to_rad(v.heading_deg);
  p.schedule = v.schedule;
  return p;
}

FusionScenario make_fusion_scenario(const ScenarioConfig& cfg, double dr_com) {
  FusionScenario sc;
  sc.observer_profile = make_motion_profile(cfg.observer);
  sc.target_profile = make_motion_profile(cfg.target);

  sc.observer_start = TargetState<double>{
      0.0,
      0.0,
      cfg.observer.speed_mps * std::cos(sc.observer_profile.initial_heading),
      cfg.observer.speed_mps * std::sin(sc.observer_profile.initial_heading),
      0.0,
      0.0,
  };
  const double bearing = deg_to_rad(cfg.initial_bearing_deg);
  sc.target_start = TargetState<double>{
      cfg.initial_separation_m * std::cos(bearing),
      cfg.initial_separation_m * std::sin(bearing),
      cfg.target.speed_mps * std::cos(sc.target_profile.initial_heading),
      cfg.target.speed_mps * std::sin(sc.target_profile.initial_heading),
      0.0,
      0.0,
  };

  sc.dt = cfg.dt_s;
  if (cfg.init == "truth") {
    sc.init.mode = FilterInit::Mode::kExplicit;
    sc.init.explicit_state.estimate = sc.target_start;
    sc.init.explicit_state.covariance = Mat6<double>::Identity();
  }
  sc.sigma_m = MeasurementNoise<double>::Zero();
  sc.sigma_m(0, 0) = cfg.sigma_m_diag[0];
  sc.sigma_m(1, 1) = cfg.sigma_m_diag[1];
  sc.sigma_s = ProcessNoise<double>::Zero();
  sc.sigma_s(0, 0) = dr_com;
  sc.sigma_s(1, 1) = dr_com;
  for (int i = 0; i < 4; ++i) sc.sigma_s(i + 2, i + 2) = cfg.sigma_s_vel_acc[static_cast<std::size_t>(i)];
  return sc;
}

iff::TimingBudget make_timing_budget(const ScenarioConfig& cfg) {
  return iff::TimingBudget::from_ms(cfg.t1_ms, cfg.t2_ms, cfg.t3_ms, cfg.t4_ms, cfg.t5_ms,
                                    cfg.t6_ms, cfg.t7_ms);
}

}  // namespace isacsim
