#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swarm/drive_control.hpp"
#include "swarm/errors.hpp"
#include "swarm/rvo_planner.hpp"

using namespace swarm;

namespace {

DriveState state(double l, double theta, double theta_dot) {
  DriveState s;
  s.l = l;
  s.theta = theta;
  s.theta_dot = theta_dot;
  s.initialized = true;
  return s;
}

}  // namespace

TEST(Drive, RawLawSymmetricUnderThetaNegation) {
  const ControlGains g;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double l = 100.0 + 50.0 * u(rng);
    const double th = u(rng);
    const double thd = 4.0 * u(rng);
    const auto [vl, vr] = raw_wheel_speeds(state(l, th, thd), g);
    const auto [wl, wr] = raw_wheel_speeds(state(l, -th, -thd), g);
    EXPECT_EQ(vl, wr);
    EXPECT_EQ(vr, wl);
  }
}

TEST(Drive, RawLawValues) {
  const ControlGains g;
  const auto [vl, vr] = raw_wheel_speeds(state(50.0, 0.1, 0.5), g);
  EXPECT_DOUBLE_EQ(vl, 100.0 - 12.0 - 5.0);
  EXPECT_DOUBLE_EQ(vr, 100.0 + 12.0 + 5.0);
}

TEST(Drive, ClampAndConvergence) {
  const ControlGains g;
  const WheelCommand far = compute_wheel_command(state(1000.0, 0.0, 0.0), g);
  EXPECT_EQ(far.v_l, 400.0);
  EXPECT_EQ(far.v_r, 400.0);
  EXPECT_TRUE(far.clamped);
  EXPECT_FALSE(far.converged);

  const WheelCommand turn = compute_wheel_command(state(20.0, -1.0, 0.0), g);
  EXPECT_EQ(turn.v_r, 0.0);
  EXPECT_DOUBLE_EQ(turn.v_l, 160.0);
  EXPECT_TRUE(turn.clamped);

  const WheelCommand done = compute_wheel_command(state(4.9, 1.0, 3.0), g);
  EXPECT_TRUE(done.converged);
  EXPECT_EQ(done.v_l, 0.0);
  EXPECT_EQ(done.v_r, 0.0);
}

TEST(Drive, RetargetGeometry) {
  DriveState s;
  s = observe(s, Pose2{{0, 0}, 0.0}, Vec2{0, 100}, 0.01, 5.0);
  EXPECT_DOUBLE_EQ(s.l, 100.0);
  EXPECT_NEAR(s.theta, kPi / 2.0, 1e-12);
  EXPECT_EQ(s.theta_dot, 0.0);
  EXPECT_FALSE(s.converged);
  s = update_goal(s, Vec2{100, 0}, 0.01, 5.0);
  EXPECT_NEAR(s.theta, 0.0, 1e-12);
  // filtered finite difference, alpha = 0.5
  EXPECT_NEAR(s.theta_dot, 0.5 * (-kPi / 2.0) / 0.01, 1e-9);
  s = update_pose(s, Pose2{{98, 0}, 0.0}, 0.01, 5.0);
  EXPECT_TRUE(s.converged);
  EXPECT_THROW(update_goal(s, Vec2{}, 0.0, 5.0), ValidationError);
}

TEST(Drive, ThetaDotWrapsAcrossPi) {
  DriveState s;
  s = observe(s, Pose2{{0, 0}, 0.0}, Vec2{-100, 1}, 0.1, 5.0);
  s = observe(s, Pose2{{0, 0}, 0.0}, Vec2{-100, -1}, 0.1, 5.0);
  EXPECT_LT(std::abs(s.theta_dot), 1.0);
}

TEST(Drive, ClosedLoopReachesGoalAhead) {
  const ControlGains g;
  Pose2 p{{0, 0}, 0.0};
  DriveState s;
  double prev = 1e9;
  for (int k = 0; k < 1000; ++k) {
    s = observe(s, p, Vec2{100, 0}, 0.01, g.sigma);
    if (k > 0) EXPECT_LT(s.l, prev);
    prev = s.l;
    const WheelCommand c = compute_wheel_command(s, g);
    if (c.converged) break;
    p = integrate_unicycle(p, {c.v_l, c.v_r}, 24.0, 0.01);
  }
  EXPECT_LT(prev, g.sigma);
  EXPECT_GT(p.position.x, 90.0);
}

TEST(Gains, Validate) {
  ControlGains g;
  EXPECT_NO_THROW(g.validate());
  g.sigma = 0.0;
  EXPECT_THROW(g.validate(), ValidationError);
  g = ControlGains{};
  g.k_l = -1.0;
  EXPECT_THROW(g.validate(), ValidationError);
  g = ControlGains{};
  g.v_l_min = 500.0;
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(Calibration, Interpolates) {
  const CalibrationCurve c{{{0.0, 0.0}, {100.0, 0.3}, {400.0, 0.9}}};
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(apply_calibration(0.0, c), 0.0);
  EXPECT_DOUBLE_EQ(apply_calibration(50.0, c), 0.15);
  EXPECT_DOUBLE_EQ(apply_calibration(100.0, c), 0.3);
  EXPECT_DOUBLE_EQ(apply_calibration(250.0, c), 0.6);
  EXPECT_DOUBLE_EQ(apply_calibration(400.0, c), 0.9);
  EXPECT_THROW(apply_calibration(401.0, c), RangeError);
  EXPECT_THROW(apply_calibration(-1.0, c), RangeError);
  EXPECT_DOUBLE_EQ(apply_calibration(200.0, CalibrationCurve::identity(400.0)), 0.5);
}

TEST(Calibration, Validate) {
  EXPECT_THROW((CalibrationCurve{{{0.0, 0.0}}}.validate()), ValidationError);
  EXPECT_THROW((CalibrationCurve{{{0.0, 0.0}, {0.0, 1.0}}}.validate()), ValidationError);
  EXPECT_THROW((CalibrationCurve{{{0.0, 0.0}, {1.0, 1.5}}}.validate()), ValidationError);
}
