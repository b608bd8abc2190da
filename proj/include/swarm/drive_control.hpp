#pragma once

// Go-to-goal wheel controller for a differential-drive robot: proportional
// speed on distance, PD steering on bearing, per-wheel clamping, a
// convergence radius, and velocity-to-duty calibration.

#include <span>
#include <utility>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct ControlGains {
  double k_l = 2.0;          // 1/s
  double k_theta = 120.0;    // mm/s per rad
  double k_theta_dot = 10.0; // mm/s per rad/s
  double sigma = 5.0;        // convergence radius, mm
  double v_l_min = 0.0;
  double v_r_min = 0.0;
  double v_l_max = 400.0;
  double v_r_max = 400.0;

  /// Throws ValidationError on negative gains, sigma <= 0 or an empty
  /// clamp range.
  void validate() const;
  /// Speed of the slower motor.
  double v_max() const;
};

struct DriveState {
  Vec2 p_n;              // current position, mm
  Vec2 p_g;              // subgoal, mm
  double heading = 0.0;  // rad
  double l = 0.0;        // |p_g - p_n|, mm
  double theta = 0.0;    // bearing of the goal relative to heading, (-pi, pi]
  double theta_dot = 0.0;
  bool converged = true;
  bool initialized = false;  // theta_dot has a previous sample
};

struct WheelCommand {
  double v_l = 0.0;
  double v_r = 0.0;
  double duty_l = 0.0;
  double duty_r = 0.0;
  bool converged = false;
  bool clamped = false;

  bool operator==(const WheelCommand&) const = default;
};

/// Raw control law before clamping: (V - dV, V + dV).
std::pair<double, double> raw_wheel_speeds(const DriveState& s, const ControlGains& g);

/// Applies the law and the per-wheel clamp. Converged states yield (0, 0).
/// Duty fields are left at zero; see apply_calibration.
WheelCommand compute_wheel_command(const DriveState& s, const ControlGains& g);

/// Re-targets the controller. theta_dot is the wrapped finite difference of
/// theta over dt, smoothed with a one-pole low-pass (alpha = 0.5).
DriveState update_goal(const DriveState& s, const Vec2& new_goal, double dt, double sigma);

/// Same as update_goal but for a new robot pose with the goal unchanged.
DriveState update_pose(const DriveState& s, const Pose2& pose, double dt, double sigma);

/// New pose and goal observed together, one theta_dot sample.
DriveState observe(const DriveState& s, const Pose2& pose, const Vec2& goal, double dt,
                   double sigma);

/// Monotone piecewise-linear velocity-to-duty table.
struct CalibrationCurve {
  std::vector<std::pair<double, double>> points;  // (velocity mm/s, duty)

  /// Throws ValidationError unless velocities strictly increase, there are at
  /// least two points, and duties lie in [0, 1].
  void validate() const;
  /// Two-point table mapping [0, v_max] onto [0, 1].
  static CalibrationCurve identity(double v_max);
};

/// Linear interpolation on the table. Throws RangeError outside its domain.
double apply_calibration(double v, const CalibrationCurve& curve);

}  // namespace swarm
