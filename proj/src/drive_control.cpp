#include "swarm/drive_control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

constexpr double kThetaDotAlpha = 0.5;

DriveState retarget(DriveState s, const Vec2& p_n, double heading, const Vec2& p_g, double dt,
                    double sigma) {
  if (!(dt > 0.0)) throw ValidationError("drive: dt must be positive");
  const double old_theta = s.theta;
  s.p_n = p_n;
  s.heading = heading;
  s.p_g = p_g;
  const Vec2 d = p_g - p_n;
  s.l = norm(d);
  s.theta = s.l > 0.0 ? wrap_angle(std::atan2(d.y, d.x) - heading) : 0.0;
  if (s.initialized) {
    const double raw = wrap_angle(s.theta - old_theta) / dt;
    s.theta_dot = kThetaDotAlpha * raw + (1.0 - kThetaDotAlpha) * s.theta_dot;
  } else {
    s.theta_dot = 0.0;
    s.initialized = true;
  }
  s.converged = s.l < sigma;
  return s;
}

}  // namespace

void ControlGains::validate() const {
  if (k_l < 0.0 || k_theta < 0.0 || k_theta_dot < 0.0 || v_l_min < 0.0 || v_r_min < 0.0 ||
      v_l_max < 0.0 || v_r_max < 0.0) {
    throw ValidationError("gains: values must be non-negative");
  }
  if (!(sigma > 0.0)) throw ValidationError("gains: sigma must be positive");
  if (v_max() < v_l_min || v_max() < v_r_min) {
    throw ValidationError("gains: V_max below a wheel's V_min");
  }
}

double ControlGains::v_max() const { return std::min(v_l_max, v_r_max); }

std::pair<double, double> raw_wheel_speeds(const DriveState& s, const ControlGains& g) {
  const double v = g.k_l * s.l;
  const double dv = g.k_theta * s.theta + g.k_theta_dot * s.theta_dot;
  return {v - dv, v + dv};
}

WheelCommand compute_wheel_command(const DriveState& s, const ControlGains& g) {
  WheelCommand cmd;
  if (s.l < g.sigma) {
    cmd.converged = true;
    return cmd;
  }
  const auto [vl, vr] = raw_wheel_speeds(s, g);
  const double vmax = g.v_max();
  cmd.v_l = std::clamp(vl, g.v_l_min, vmax);
  cmd.v_r = std::clamp(vr, g.v_r_min, vmax);
  cmd.clamped = cmd.v_l != vl || cmd.v_r != vr;
  return cmd;
}

DriveState update_goal(const DriveState& s, const Vec2& new_goal, double dt, double sigma) {
  return retarget(s, s.p_n, s.heading, new_goal, dt, sigma);
}

DriveState update_pose(const DriveState& s, const Pose2& pose, double dt, double sigma) {
  return retarget(s, pose.position, pose.heading, s.p_g, dt, sigma);
}

DriveState observe(const DriveState& s, const Pose2& pose, const Vec2& goal, double dt,
                   double sigma) {
  return retarget(s, pose.position, pose.heading, goal, dt, sigma);
}

void CalibrationCurve::validate() const {
  if (points.size() < 2) throw ValidationError("calibration: need at least two points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [v, d] = points[i];
    if (!std::isfinite(v) || !(d >= 0.0 && d <= 1.0)) {
      throw ValidationError("calibration: point " + std::to_string(i) + " out of range");
    }
    if (i > 0 && !(v > points[i - 1].first)) {
      throw ValidationError("calibration: velocities must strictly increase");
    }
  }
}

CalibrationCurve CalibrationCurve::identity(double v_max) { return {{{0.0, 0.0}, {v_max, 1.0}}}; }

double apply_calibration(double v, const CalibrationCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty() || v < pts.front().first || v > pts.back().first) {
    throw RangeError("calibration: velocity " + std::to_string(v) + " outside table");
  }
  auto hi = std::lower_bound(pts.begin(), pts.end(), v,
                             [](const auto& p, double x) { return p.first < x; });
  if (hi->first == v) return hi->second;
  auto lo = hi - 1;
  const double s = (v - lo->first) / (hi->first - lo->first);
  return std::clamp(lo->second + s * (hi->second - lo->second), 0.0, 1.0);
}

}  // namespace swarm
