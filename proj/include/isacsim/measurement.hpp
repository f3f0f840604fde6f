#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "isacsim/kinematics.hpp"
#include "isacsim/rng.hpp"

namespace isacsim {

/// Range (m, >= 0) and bearing (rad, wrapped into (-pi, pi], east-north
/// atan2 convention).
template <typename Scalar>
struct RadarMeasurement {
  Scalar range{0};
  Scalar bearing{0};

  Vec2<Scalar> vec() const { return Vec2<Scalar>(range, bearing); }
  bool operator==(const RadarMeasurement&) const = default;
};

/// Covariance of the range/bearing measurement error (m^2, rad^2 diagonal).
template <typename Scalar>
using MeasurementNoise = Mat2<Scalar>;

/// Covariance attached to the communicated state in the prediction step,
/// laid out like TargetState.
template <typename Scalar>
using ProcessNoise = Mat6<Scalar>;

/// Symmetric to `tol` (relative to the largest entry) with all eigenvalues
/// above -tol.
template <typename Derived>
bool is_symmetric_psd(const Eigen::MatrixBase<Derived>& m, double tol = 1e-9) {
  using Scalar = typename Derived::Scalar;
  const auto& mat = m.derived();
  if (!mat.allFinite()) return false;
  const double scale = std::max(1.0, double(mat.cwiseAbs().maxCoeff()));
  if (double((mat - mat.transpose()).cwiseAbs().maxCoeff()) > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Derived::RowsAtCompileTime,
                                              Derived::ColsAtCompileTime>>
      eig(mat, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && double(eig.eigenvalues().minCoeff()) > -tol * scale;
}

/// Forward observation h: range and bearing from observer to target.
template <typename Scalar>
RadarMeasurement<Scalar> observe(const ObserverPose<Scalar>& pose, const TargetState<Scalar>& s) {
  const Scalar dx = s.x - pose.x;
  const Scalar dy = s.y - pose.y;
  const Scalar range = std::hypot(dx, dy);
  if (!(range > Scalar(0)))
    throw std::domain_error("observe: target coincides with observer, bearing undefined");
  return RadarMeasurement<Scalar>{range, std::atan2(dy, dx)};
}

/// Geometric inverse of observe on the position components:
/// x = x0 + R*cos(a), y = y0 + R*sin(a).
template <typename Scalar>
Vec2<Scalar> target_position_from_measurement(const ObserverPose<Scalar>& pose,
                                              const RadarMeasurement<Scalar>& m) {
  return Vec2<Scalar>(pose.x + m.range * std::cos(m.bearing),
                      pose.y + m.range * std::sin(m.bearing));
}

/// Jacobian of observe with respect to the 6-dim state. Velocity and
/// acceleration columns are zero; range must be positive.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 6> measurement_jacobian(const ObserverPose<Scalar>& pose,
                                                 const TargetState<Scalar>& s) {
  const Scalar dx = s.x - pose.x;
  const Scalar dy = s.y - pose.y;
  const Scalar r2 = dx * dx + dy * dy;
  const Scalar r = std::sqrt(r2);
  if (!(r > Scalar(0))) throw std::domain_error("measurement_jacobian: zero range singularity");
  Eigen::Matrix<Scalar, 2, 6> h = Eigen::Matrix<Scalar, 2, 6>::Zero();
  h(0, 0) = dx / r;
  h(0, 1) = dy / r;
  h(1, 0) = -dy / r2;
  h(1, 1) = dx / r2;
  return h;
}

/// Adds a zero-mean Gaussian error with the given covariance, wraps the
/// bearing and clamps the range at zero. Sets *range_clamped when the clamp
/// fires so trial diagnostics can record it.
inline RadarMeasurement<double> sample_noisy_measurement(const RadarMeasurement<double>& true_m,
                                                         const MeasurementNoise<double>& noise,
                                                         RngStream& rng,
                                                         bool* range_clamped = nullptr) {
  if (!is_symmetric_psd(noise))
    throw std::invalid_argument("sample_noisy_measurement: noise covariance must be symmetric PSD");
  Eigen::SelfAdjointEigenSolver<Mat2<double>> eig(noise);
  const Vec2<double> sqrt_eigs = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Vec2<double> z(rng.gaussian(), rng.gaussian());
  const Vec2<double> err = eig.eigenvectors() * sqrt_eigs.cwiseProduct(z);

  RadarMeasurement<double> out;
  out.range = true_m.range + err[0];
  if (range_clamped) *range_clamped = out.range < 0.0;
  if (out.range < 0.0) out.range = 0.0;
  // Wrap only when the perturbed bearing leaves (-pi, pi]; the wrap is a
  // lossy add/subtract of pi, and a zero-noise draw must return the input
  // exactly.
  const double raw = true_m.bearing + err[1];
  out.bearing = (raw > kPi || raw <= -kPi) ? wrap_angle(raw) : raw;
  return out;
}

}  // namespace isacsim
