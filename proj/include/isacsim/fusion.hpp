#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isacsim/kinematics.hpp"
#include "isacsim/measurement.hpp"
#include "isacsim/rng.hpp"

namespace isacsim {

/// State estimate plus error covariance, carried across filter iterations.
template <typename Scalar>
struct FilterState {
  TargetState<Scalar> estimate;
  Mat6<Scalar> covariance = Mat6<Scalar>::Zero();
  int step{0};
};

using FilterStateD = FilterState<double>;

/// Raised when the innovation covariance becomes numerically unusable or the
/// error covariance loses positive semi-definiteness.
class FilterDivergenceError : public std::runtime_error {
 public:
  FilterDivergenceError(const std::string& what, int step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

struct UpdateOptions {
  /// Joseph-stabilized covariance update instead of the plain P - G*H*P form.
  bool joseph_form = false;
  /// Predicted measurement as the linearized map H*s instead of h(s).
  bool linearized_measurement = false;
  /// Innovation covariance condition number above which the filter is
  /// declared divergent.
  double max_condition = 1e12;
  /// Covariance eigenvalues below -psd_tol (relative) fail the PSD invariant.
  double psd_tol = 1e-9;
};

/// Prediction step: propagates the mean through the motion model and the
/// covariance through its Jacobian, adding the communicated-state
/// uncertainty q.
template <typename Scalar>
FilterState<Scalar> predict(const FilterState<Scalar>& f, Scalar dt, const ProcessNoise<Scalar>& q) {
  if (!is_symmetric_psd(q))
    throw std::invalid_argument("predict: process covariance must be symmetric PSD");
  if (!is_finite(f.estimate) || !f.covariance.allFinite())
    throw std::invalid_argument("predict: non-finite filter state");
  const Mat6<Scalar> fjac = motion_jacobian(dt);
  FilterState<Scalar> out = f;
  out.estimate = propagate_state(f.estimate, dt);
  out.covariance = fjac * f.covariance * fjac.transpose() + q;
  out.covariance = Scalar(0.5) * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

/// Measurement update with the radar range/bearing observation. The bearing
/// residual is wrapped into (-pi, pi] before the gain is applied.
template <typename Scalar>
FilterState<Scalar> update(const FilterState<Scalar>& f, const RadarMeasurement<Scalar>& m,
                           const MeasurementNoise<Scalar>& r, const ObserverPose<Scalar>& pose,
                           const UpdateOptions& opt = {}) {
  if (!is_symmetric_psd(r))
    throw std::invalid_argument("update: measurement covariance must be symmetric PSD");
  if (!is_finite(f.estimate) || !f.covariance.allFinite())
    throw std::invalid_argument("update: non-finite filter state");

  const Eigen::Matrix<Scalar, 2, 6> h = measurement_jacobian(pose, f.estimate);
  RadarMeasurement<Scalar> predicted = observe(pose, f.estimate);
  if (opt.linearized_measurement) {
    const Vec2<Scalar> lin = h * f.estimate.vec();
    predicted = RadarMeasurement<Scalar>{lin[0], wrap_angle(lin[1])};
  }

  const Scalar raw_residual = m.bearing - predicted.bearing;
  const Scalar bearing_residual = (raw_residual > Scalar(kPi) || raw_residual <= Scalar(-kPi))
                                      ? wrap_angle(raw_residual)
                                      : raw_residual;
  const Vec2<Scalar> innovation(m.range - predicted.range, bearing_residual);

  const Mat2<Scalar> innov_cov =
      (h * f.covariance * h.transpose() + r).template selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Mat2<Scalar>> s_eig(innov_cov);
  const Scalar lo = s_eig.eigenvalues().minCoeff();
  const Scalar hi = s_eig.eigenvalues().maxCoeff();
  if (!(lo > Scalar(0)) || hi / lo > Scalar(opt.max_condition)) {
    // A degenerate innovation covariance with a vanishing residual is the
    // fully-converged noiseless regime: the measurement is consistent and
    // adds nothing, so the update is a no-op rather than divergence.
    const Scalar residual_scale = std::max(Scalar(1), predicted.range);
    if (innovation.cwiseAbs().maxCoeff() <= Scalar(1e-12) * residual_scale) return f;
    throw FilterDivergenceError("update: innovation covariance ill-conditioned", f.step);
  }

  const Eigen::Matrix<Scalar, 6, 2> gain = f.covariance * h.transpose() * innov_cov.inverse();
  FilterState<Scalar> out = f;
  out.estimate = TargetState<Scalar>::from_vec(f.estimate.vec() + gain * innovation);

  if (opt.joseph_form) {
    const Mat6<Scalar> ident_kh = Mat6<Scalar>::Identity() - gain * h;
    out.covariance = ident_kh * f.covariance * ident_kh.transpose() + gain * r * gain.transpose();
  } else {
    out.covariance = f.covariance - gain * h * f.covariance;
  }
  out.covariance = Scalar(0.5) * (out.covariance + out.covariance.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat6<Scalar>> p_eig(out.covariance, Eigen::EigenvaluesOnly);
  const Scalar p_scale = std::max(Scalar(1), out.covariance.cwiseAbs().maxCoeff());
  if (!(p_eig.eigenvalues().minCoeff() > -Scalar(opt.psd_tol) * p_scale))
    throw FilterDivergenceError("update: covariance lost positive semi-definiteness", f.step);
  return out;
}

/// Improvement ratio (dr_rad - dr_ekf) / dr_rad.
inline double sensing_improvement_ratio(double dr_rad, double dr_ekf) {
  if (!(dr_rad > 0.0))
    throw std::invalid_argument("sensing_improvement_ratio: dr_rad must be > 0");
  return (dr_rad - dr_ekf) / dr_rad;
}

/// Filter initialization policy for a fusion trial.
struct FilterInit {
  enum class Mode {
    kFromFirstMeasurement,  // positions via the measurement inverse, loose derivatives
    kExplicit,              // caller-provided state and covariance
  };
  Mode mode = Mode::kFromFirstMeasurement;
  FilterState<double> explicit_state{};
  double derivative_variance = 25.0;  // velocity/acceleration prior variance
};

/// Everything one Monte Carlo trial needs; built by the harness from its
/// scenario configuration.
struct FusionScenario {
  MotionProfile<double> observer_profile;
  TargetState<double> observer_start;
  MotionProfile<double> target_profile;
  TargetState<double> target_start;
  double dt = 0.1;
  MeasurementNoise<double> sigma_m = MeasurementNoise<double>::Zero();
  ProcessNoise<double> sigma_s = ProcessNoise<double>::Zero();
  FilterInit init;
  UpdateOptions update_options;
};

struct StepRecord {
  TargetState<double> truth;
  double radar_range_error{0};     // noisy measured range minus true range
  double fused_range_error{0};     // estimated range minus true range
  double radar_position_error{0};  // Euclidean error of the raw measurement fix
  double fused_position_error{0};  // Euclidean error of the filter estimate
  double covariance_trace{0};

  bool operator==(const StepRecord&) const = default;
};

struct TrialRecord {
  std::vector<StepRecord> steps;  // steps[i] is filter iteration k = i+1
  int range_clamp_events{0};

  bool operator==(const TrialRecord&) const = default;
};

/// Builds the filter state from the first noisy measurement: positions via
/// the measurement inverse, zero derivatives, covariance rotated so the
/// range/cross-range measurement uncertainty lands on the position block.
inline FilterState<double> init_from_measurement(const ObserverPose<double>& pose,
                                                 const RadarMeasurement<double>& m0,
                                                 const MeasurementNoise<double>& sigma_m,
                                                 double derivative_variance) {
  FilterState<double> f;
  const Vec2<double> p = target_position_from_measurement(pose, m0);
  f.estimate = TargetState<double>{p[0], p[1], 0, 0, 0, 0};

  const double c = std::cos(m0.bearing), s = std::sin(m0.bearing);
  Mat2<double> rot;
  rot << c, -s, s, c;
  Mat2<double> radial = Mat2<double>::Zero();
  radial(0, 0) = sigma_m(0, 0);
  radial(1, 1) = sigma_m(1, 1) * m0.range * m0.range;
  f.covariance = Mat6<double>::Zero();
  f.covariance.topLeftCorner<2, 2>() = rot * radial * rot.transpose();
  for (int i = 2; i < 6; ++i) f.covariance(i, i) = derivative_variance;
  return f;
}

/// Runs one fused-tracking trial: ground truth advances, a noisy radar
/// measurement is drawn, and the filter runs predict+update, for k = 1..k_max.
inline TrialRecord run_fusion_trial(const FusionScenario& sc, int k_max, RngStream& rng) {
  if (k_max < 1) throw std::invalid_argument("run_fusion_trial: k_max must be >= 1");
  const auto observer_traj =
      generate_trajectory(sc.observer_profile, sc.observer_start, k_max, sc.dt);
  const auto target_traj = generate_trajectory(sc.target_profile, sc.target_start, k_max, sc.dt);

  TrialRecord record;
  record.steps.reserve(static_cast<std::size_t>(k_max));

  const auto pose_at = [&](int k) {
    return pose_from_state(observer_traj[static_cast<std::size_t>(k)],
                           sc.observer_profile.initial_heading);
  };

  FilterState<double> filter;
  if (sc.init.mode == FilterInit::Mode::kExplicit) {
    filter = sc.init.explicit_state;
  } else {
    const ObserverPose<double> pose0 = pose_at(0);
    bool clamped = false;
    const RadarMeasurement<double> m0 =
        sample_noisy_measurement(observe(pose0, target_traj[0]), sc.sigma_m, rng, &clamped);
    if (clamped) ++record.range_clamp_events;
    filter = init_from_measurement(pose0, m0, sc.sigma_m, sc.init.derivative_variance);
  }

  for (int k = 1; k <= k_max; ++k) {
    filter = predict(filter, sc.dt, sc.sigma_s);
    const ObserverPose<double> pose = pose_at(k);
    const TargetState<double>& truth = target_traj[static_cast<std::size_t>(k)];
    const RadarMeasurement<double> true_m = observe(pose, truth);
    bool clamped = false;
    const RadarMeasurement<double> noisy =
        sample_noisy_measurement(true_m, sc.sigma_m, rng, &clamped);
    if (clamped) ++record.range_clamp_events;
    filter = update(filter, noisy, sc.sigma_m, pose, sc.update_options);
    filter.step = k;

    StepRecord rec;
    rec.truth = truth;
    rec.radar_range_error = noisy.range - true_m.range;
    rec.fused_range_error = observe(pose, filter.estimate).range - true_m.range;
    rec.radar_position_error =
        (target_position_from_measurement(pose, noisy) - truth.position()).norm();
    rec.fused_position_error = (filter.estimate.position() - truth.position()).norm();
    rec.covariance_trace = filter.covariance.trace();
    record.steps.push_back(rec);
  }
  return record;
}

/// Range-error variances of raw radar, communicated location, and the fused
/// estimate, plus the improvement ratio.
struct FusionMetrics {
  double dr_rad{0};
  double dr_com{0};
  double dr_ekf{0};
  double rho_s{0};
};

/// Sample variance with the n-1 denominator.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need at least 2 samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

/// Cross-trial range-error variances at filter iteration k (1-based).
inline FusionMetrics estimate_error_variances(std::span<const TrialRecord> records, int k,
                                              double dr_com) {
  if (records.size() < 2)
    throw std::invalid_argument("estimate_error_variances: need at least 2 trials");
  std::vector<double> radar, fused;
  radar.reserve(records.size());
  fused.reserve(records.size());
  for (const auto& rec : records) {
    if (k < 1 || static_cast<std::size_t>(k) > rec.steps.size())
      throw std::invalid_argument("estimate_error_variances: step index out of range");
    radar.push_back(rec.steps[static_cast<std::size_t>(k - 1)].radar_range_error);
    fused.push_back(rec.steps[static_cast<std::size_t>(k - 1)].fused_range_error);
  }
  FusionMetrics m;
  m.dr_rad = sample_variance(radar);
  m.dr_ekf = sample_variance(fused);
  m.dr_com = dr_com;
  // Degenerate noiseless runs have dr_rad == 0; report no improvement rather
  // than dividing by zero.
  m.rho_s = m.dr_rad > 0.0 ? sensing_improvement_ratio(m.dr_rad, m.dr_ekf) : 0.0;
  return m;
}

}  // namespace isacsim
