#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace isacsim {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vec6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Mat6 = Eigen::Matrix<Scalar, 6, 6>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
Scalar deg_to_rad(Scalar deg) {
  return deg * Scalar(kPi) / Scalar(180);
}

/// Wraps an angle into (-pi, pi]. Exactly -pi maps to +pi.
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * Scalar(kPi);
  a = std::fmod(a + Scalar(kPi), two_pi);
  if (a <= Scalar(0)) a += two_pi;
  return a - Scalar(kPi);
}

/// Planar kinematic state: position, velocity, acceleration (east/north).
/// Vector layout is [x, y, vx, vy, ax, ay].
template <typename Scalar>
struct TargetState {
  Scalar x{0}, y{0};
  Scalar vx{0}, vy{0};
  Scalar ax{0}, ay{0};

  Vec6<Scalar> vec() const {
    Vec6<Scalar> v;
    v << x, y, vx, vy, ax, ay;
    return v;
  }

  static TargetState from_vec(const Vec6<Scalar>& v) {
    return TargetState{v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  Vec2<Scalar> position() const { return Vec2<Scalar>(x, y); }
  Vec2<Scalar> velocity() const { return Vec2<Scalar>(vx, vy); }
  Vec2<Scalar> acceleration() const { return Vec2<Scalar>(ax, ay); }

  bool operator==(const TargetState&) const = default;
};

template <typename Scalar>
bool is_finite(const TargetState<Scalar>& s) {
  return s.vec().allFinite();
}

/// Observer position plus heading (radians, wrapped into (-pi, pi]).
template <typename Scalar>
struct ObserverPose {
  Scalar x{0}, y{0};
  Scalar heading{0};

  Vec2<Scalar> position() const { return Vec2<Scalar>(x, y); }
};

enum class TurnDirection { kLeft, kStraight, kRight };

/// Half-open step interval [begin_step, end_step) with a turn direction.
struct ManeuverInterval {
  int begin_step{0};
  int end_step{0};
  TurnDirection turn{TurnDirection::kStraight};

  bool operator==(const ManeuverInterval&) const = default;
};

/// Ground-truth motion parameters. Angular quantities are radians here;
/// degree conversion happens at config parse.
template <typename Scalar>
struct MotionProfile {
  Scalar speed{0};            // m/s, cruise/cap speed
  Scalar acceleration{0};     // m/s^2, applied along heading until cap
  Scalar angular_speed{0};    // rad/s during turn intervals
  Scalar initial_heading{0};  // rad
  std::vector<ManeuverInterval> schedule;  // steps not covered are straight
};

template <typename Scalar>
void validate_profile(const MotionProfile<Scalar>& p) {
  if (!(p.speed >= Scalar(0)) || !std::isfinite(double(p.speed)))
    throw std::invalid_argument("MotionProfile: speed must be finite and >= 0");
  if (!(p.angular_speed >= Scalar(0)) || !std::isfinite(double(p.angular_speed)))
    throw std::invalid_argument("MotionProfile: angular_speed must be finite and >= 0");
  if (!std::isfinite(double(p.acceleration)) || !std::isfinite(double(p.initial_heading)))
    throw std::invalid_argument("MotionProfile: acceleration and heading must be finite");
  int last_end = std::numeric_limits<int>::min();
  for (const auto& iv : p.schedule) {
    if (iv.begin_step < 0 || iv.end_step < iv.begin_step)
      throw std::invalid_argument("MotionProfile: schedule interval must satisfy 0 <= begin <= end");
    if (iv.begin_step < last_end)
      throw std::invalid_argument("MotionProfile: schedule intervals must be ordered and non-overlapping");
    last_end = iv.end_step;
  }
}

/// Constant-acceleration step: x += vx*dt + ax*dt^2/2, vx += ax*dt,
/// acceleration unchanged (same for y). Exactly linear in the state.
template <typename Scalar>
TargetState<Scalar> propagate_state(const TargetState<Scalar>& s, Scalar dt) {
  if (!is_finite(s)) throw std::invalid_argument("propagate_state: non-finite state");
  if (!(dt >= Scalar(0)) || !std::isfinite(double(dt)))
    throw std::invalid_argument("propagate_state: dt must be finite and >= 0");
  const Scalar half_dt2 = Scalar(0.5) * dt * dt;
  TargetState<Scalar> out = s;
  out.x = s.x + s.vx * dt + s.ax * half_dt2;
  out.y = s.y + s.vy * dt + s.ay * half_dt2;
  out.vx = s.vx + s.ax * dt;
  out.vy = s.vy + s.ay * dt;
  return out;
}

/// Jacobian of propagate_state; the model is linear so this is exact.
template <typename Scalar>
Mat6<Scalar> motion_jacobian(Scalar dt) {
  if (!(dt >= Scalar(0)) || !std::isfinite(double(dt)))
    throw std::invalid_argument("motion_jacobian: dt must be finite and >= 0");
  Mat6<Scalar> f = Mat6<Scalar>::Identity();
  const Scalar half_dt2 = Scalar(0.5) * dt * dt;
  f(0, 2) = dt;
  f(1, 3) = dt;
  f(2, 4) = dt;
  f(3, 5) = dt;
  f(0, 4) = half_dt2;
  f(1, 5) = half_dt2;
  return f;
}

namespace detail {

template <typename Scalar>
TurnDirection turn_at_step(const MotionProfile<Scalar>& p, int step) {
  for (const auto& iv : p.schedule) {
    if (step >= iv.begin_step && step < iv.end_step) return iv.turn;
  }
  return TurnDirection::kStraight;
}

}  // namespace detail

/// Generates n_steps+1 ground-truth states starting at `start`.
///
/// Straight steps apply profile.acceleration along the current velocity
/// direction (initial heading when at rest) until profile.speed is reached;
/// turn steps rotate the velocity by angular_speed*dt with speed held
/// constant and record the implied finite-difference acceleration.
template <typename Scalar>
std::vector<TargetState<Scalar>> generate_trajectory(const MotionProfile<Scalar>& profile,
                                                     const TargetState<Scalar>& start, int n_steps,
                                                     Scalar dt) {
  validate_profile(profile);
  if (n_steps < 1) throw std::invalid_argument("generate_trajectory: n_steps must be >= 1");
  if (!(dt > Scalar(0)) || !std::isfinite(double(dt)))
    throw std::invalid_argument("generate_trajectory: dt must be finite and > 0");
  if (!is_finite(start)) throw std::invalid_argument("generate_trajectory: non-finite start state");

  const Scalar start_speed = start.velocity().norm();
  const Scalar speed_bound = Scalar(1.5) * std::max(profile.speed, start_speed);

  std::vector<TargetState<Scalar>> traj;
  traj.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.push_back(start);

  TargetState<Scalar> s = start;
  for (int step = 0; step < n_steps; ++step) {
    const TurnDirection turn = detail::turn_at_step(profile, step);
    if (turn == TurnDirection::kStraight) {
      const Scalar speed = s.velocity().norm();
      Vec2<Scalar> dir;
      if (speed > Scalar(0)) {
        dir = s.velocity() / speed;
      } else {
        dir = Vec2<Scalar>(std::cos(profile.initial_heading), std::sin(profile.initial_heading));
      }
      const Vec2<Scalar> accel =
          (speed < profile.speed) ? Vec2<Scalar>(profile.acceleration * dir) : Vec2<Scalar>::Zero();
      s.ax = accel[0];
      s.ay = accel[1];
      s = propagate_state(s, dt);
      // Acceleration stops at the cap; clamp the overshoot step.
      const Scalar new_speed = s.velocity().norm();
      if (profile.speed > Scalar(0) && new_speed > profile.speed) {
        const Scalar scale = profile.speed / new_speed;
        s.vx *= scale;
        s.vy *= scale;
        s.ax = Scalar(0);
        s.ay = Scalar(0);
      }
    } else {
      const Scalar dtheta =
          (turn == TurnDirection::kLeft ? profile.angular_speed : -profile.angular_speed) * dt;
      const Scalar c = std::cos(dtheta), sn = std::sin(dtheta);
      const Vec2<Scalar> v_old = s.velocity();
      const Vec2<Scalar> v_new(c * v_old[0] - sn * v_old[1], sn * v_old[0] + c * v_old[1]);
      s.x += v_old[0] * dt;
      s.y += v_old[1] * dt;
      s.vx = v_new[0];
      s.vy = v_new[1];
      s.ax = (v_new[0] - v_old[0]) / dt;
      s.ay = (v_new[1] - v_old[1]) / dt;
    }
    if (s.velocity().norm() > speed_bound && speed_bound > Scalar(0))
      throw std::runtime_error("generate_trajectory: speed bound exceeded during integration");
    traj.push_back(s);
  }
  return traj;
}

/// Pose of a vehicle flying a trajectory state: heading follows the velocity
/// vector, falling back to `fallback_heading` when stationary.
template <typename Scalar>
ObserverPose<Scalar> pose_from_state(const TargetState<Scalar>& s, Scalar fallback_heading) {
  const Scalar speed = s.velocity().norm();
  const Scalar heading = speed > Scalar(1e-12) ? std::atan2(s.vy, s.vx) : fallback_heading;
  return ObserverPose<Scalar>{s.x, s.y, wrap_angle(heading)};
}

}  // namespace isacsim
