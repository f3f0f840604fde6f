#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "isacsim/measurement.hpp"

using namespace isacsim;

TEST_CASE("observe axis-aligned geometries") {
  const ObserverPose<double> origin{0, 0, 0};
  const auto east = observe(origin, TargetState<double>{100, 0, 0, 0, 0, 0});
  CHECK(east.range == doctest::Approx(100.0));
  CHECK(east.bearing == doctest::Approx(0.0));

  const auto north = observe(origin, TargetState<double>{0, 100, 0, 0, 0, 0});
  CHECK(north.range == doctest::Approx(100.0));
  CHECK(north.bearing == doctest::Approx(kPi / 2));
}

TEST_CASE("observe on a 3-4-5 triangle") {
  const ObserverPose<double> pose{10, 10, 0};
  const auto m = observe(pose, TargetState<double>{40, 50, 0, 0, 0, 0});
  CHECK(m.range == doctest::Approx(50.0));
  CHECK(m.bearing == doctest::Approx(std::atan2(40.0, 30.0)));
  CHECK(m.bearing == doctest::Approx(0.9272952180016122));
}

TEST_CASE("observe rejects coincident positions") {
  const ObserverPose<double> pose{5, 5, 0};
  CHECK_THROWS_AS(observe(pose, TargetState<double>{5, 5, 1, 1, 0, 0}), std::domain_error);
}

TEST_CASE("target_position_from_measurement evaluates the geometric inverse") {
  const ObserverPose<double> origin{0, 0, 0};
  const Vec2<double> p = target_position_from_measurement(origin, RadarMeasurement<double>{100, 0});
  CHECK(p[0] == doctest::Approx(100.0));
  CHECK(p[1] == doctest::Approx(0.0));

  const ObserverPose<double> pose{10, 10, 0};
  const Vec2<double> q =
      target_position_from_measurement(pose, RadarMeasurement<double>{50, 0.9272952180016122});
  CHECK(q[0] == doctest::Approx(40.0).epsilon(1e-6));
  CHECK(q[1] == doctest::Approx(50.0).epsilon(1e-6));
}

TEST_CASE("observe and its inverse round trip on positions") {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> coord(-1000.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const ObserverPose<double> pose{coord(gen), coord(gen), 0};
    TargetState<double> s{coord(gen), coord(gen), coord(gen), coord(gen), 0, 0};
    if ((s.position() - pose.position()).norm() < 1e-6) s.x += 1.0;
    const Vec2<double> back = target_position_from_measurement(pose, observe(pose, s));
    CHECK((back - s.position()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("measurement_jacobian hand values at an axis-aligned point") {
  const ObserverPose<double> origin{0, 0, 0};
  const auto h = measurement_jacobian(origin, TargetState<double>{100, 0, 0, 0, 0, 0});
  CHECK(h(0, 0) == doctest::Approx(1.0));
  CHECK(h(0, 1) == doctest::Approx(0.0));
  CHECK(h(1, 0) == doctest::Approx(0.0));
  CHECK(h(1, 1) == doctest::Approx(0.01));
  // h depends only on position
  for (int col = 2; col < 6; ++col) {
    CHECK(h(0, col) == 0.0);
    CHECK(h(1, col) == 0.0);
  }
}

TEST_CASE("measurement_jacobian matches central finite differences") {
  std::mt19937 gen(31);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  int checked = 0;
  while (checked < 200) {
    const ObserverPose<double> pose{coord(gen), coord(gen), 0};
    const TargetState<double> s{coord(gen), coord(gen), coord(gen), coord(gen), coord(gen),
                                coord(gen)};
    const double range = (s.position() - pose.position()).norm();
    if (range < 1.0) continue;
    ++checked;

    const auto jac = measurement_jacobian(pose, s);
    Eigen::Matrix<double, 2, 6> fd = Eigen::Matrix<double, 2, 6>::Zero();
    const double h = 6e-6 * std::max(1.0, range);
    for (int j = 0; j < 2; ++j) {
      Vec6<double> plus = s.vec(), minus = s.vec();
      plus[j] += h;
      minus[j] -= h;
      const auto mp = observe(pose, TargetState<double>::from_vec(plus));
      const auto mm = observe(pose, TargetState<double>::from_vec(minus));
      fd(0, j) = (mp.range - mm.range) / (2 * h);
      fd(1, j) = wrap_angle(mp.bearing - mm.bearing) / (2 * h);
    }
    CHECK((fd - jac).norm() / jac.norm() < 1e-6);
  }
}

TEST_CASE("measurement_jacobian rejects zero range") {
  const ObserverPose<double> pose{1, 2, 0};
  CHECK_THROWS_AS(measurement_jacobian(pose, TargetState<double>{1, 2, 0, 0, 0, 0}),
                  std::domain_error);
}

TEST_CASE("zero noise sampling is the identity") {
  RngStream rng(1, 0);
  const RadarMeasurement<double> m{250.0, 0.5};
  const auto out = sample_noisy_measurement(m, MeasurementNoise<double>::Zero(), rng);
  CHECK(out.range == 250.0);
  CHECK(out.bearing == 0.5);
}

TEST_CASE("sampled range error variance matches the configured covariance") {
  MeasurementNoise<double> noise = MeasurementNoise<double>::Zero();
  noise(0, 0) = 10.0;
  noise(1, 1) = 0.01;
  RngStream rng(99, 0);
  const RadarMeasurement<double> truth{5000.0, 0.3};

  const int n = 100000;
  double sum = 0, sum_sq = 0;
  double bearing_sum = 0, bearing_sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_noisy_measurement(truth, noise, rng);
    const double range_err = s.range - truth.range;
    const double bearing_err = wrap_angle(s.bearing - truth.bearing);
    sum += range_err;
    sum_sq += range_err * range_err;
    bearing_sum += bearing_err;
    bearing_sq += bearing_err * bearing_err;
  }
  const double var = (sum_sq - sum * sum / n) / (n - 1);
  const double bearing_var = (bearing_sq - bearing_sum * bearing_sum / n) / (n - 1);
  CHECK(var > 9.5);
  CHECK(var < 10.5);
  CHECK(bearing_var > 0.0095);
  CHECK(bearing_var < 0.0105);
}

TEST_CASE("sampling with a fixed seed reproduces the sequence") {
  MeasurementNoise<double> noise = MeasurementNoise<double>::Zero();
  noise(0, 0) = 4.0;
  noise(1, 1) = 0.02;
  const RadarMeasurement<double> truth{100.0, -1.0};

  RngStream a(1234, 7), b(1234, 7);
  for (int i = 0; i < 100; ++i) {
    const auto ma = sample_noisy_measurement(truth, noise, a);
    const auto mb = sample_noisy_measurement(truth, noise, b);
    CHECK(ma.range == mb.range);
    CHECK(ma.bearing == mb.bearing);
  }
}

TEST_CASE("negative ranges clamp to zero and report the clamp") {
  MeasurementNoise<double> noise = MeasurementNoise<double>::Zero();
  noise(0, 0) = 100.0;
  RngStream rng(5, 0);
  const RadarMeasurement<double> truth{0.5, 0.0};  // range far below noise std
  int clamps = 0;
  for (int i = 0; i < 2000; ++i) {
    bool clamped = false;
    const auto s = sample_noisy_measurement(truth, noise, rng, &clamped);
    CHECK(s.range >= 0.0);
    if (clamped) ++clamps;
  }
  CHECK(clamps > 0);
}

TEST_CASE("sampled bearings stay wrapped") {
  MeasurementNoise<double> noise = MeasurementNoise<double>::Zero();
  noise(1, 1) = 4.0;
  RngStream rng(6, 0);
  const RadarMeasurement<double> truth{100.0, 3.0};  // near the wrap point
  for (int i = 0; i < 2000; ++i) {
    const auto s = sample_noisy_measurement(truth, noise, rng);
    CHECK(s.bearing > -kPi);
    CHECK(s.bearing <= kPi);
  }
}

TEST_CASE("non-PSD noise is rejected") {
  MeasurementNoise<double> noise;
  noise << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, -1
  RngStream rng(1, 0);
  CHECK_THROWS_AS(sample_noisy_measurement(RadarMeasurement<double>{10, 0}, noise, rng),
                  std::invalid_argument);
}

TEST_CASE("is_symmetric_psd classifies matrices") {
  CHECK(is_symmetric_psd(Mat2<double>::Identity()));
  CHECK(is_symmetric_psd(Mat2<double>::Zero()));
  Mat2<double> asym;
  asym << 1, 0.5, -0.5, 1;
  CHECK_FALSE(is_symmetric_psd(asym));
  Mat6<double> big = Mat6<double>::Identity();
  big(3, 3) = -1e-3;
  CHECK_FALSE(is_symmetric_psd(big));
}
