#pragma once

// Reciprocal collision avoidance in velocity space (half-plane variant) with
// polygonal static obstacles, plus the effective-center transform used to
// drive differential-drive robots holonomically.

#include <optional>
#include <span>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

struct PlannerConfig {
  double time_horizon = 2.0;            // s
  double time_horizon_obstacles = 1.0;  // s
  double neighbor_dist = 150.0;         // mm
  std::size_t max_neighbors = 10;
  double max_speed = 400.0;               // mm/s
  double effective_center_offset = 7.5;   // D, mm
  double dt = 0.01;                       // s

  /// Throws ValidationError unless every field is positive and D <= radius.
  void validate(double robot_radius) const;
};

/// Static polygon, counterclockwise, simple, at least 3 vertices.
struct Obstacle {
  std::vector<Vec2> polygon;

  void validate() const;
  bool operator==(const Obstacle&) const = default;
};

/// Wheel-speed envelope of a differential-drive agent, expressed as a diamond
/// of reachable effective-center velocities.
struct DiffDriveLimits {
  double heading = 0.0;
  double wheel_base = 24.0;
  double max_wheel_speed = 400.0;
};

struct AgentInput {
  Vec2 position;        // effective center, mm
  Vec2 velocity;        // mm/s
  double radius = 15.0; // inflated by D, mm
  Vec2 pref_velocity;   // mm/s
  std::optional<DiffDriveLimits> drive;
};

/// New velocity for `self`. Neighbors beyond neighbor_dist are ignored and
/// the nearest max_neighbors are kept. When the constraints are infeasible
/// the velocity that minimises the largest penetration is returned.
Vec2 compute_velocity(const AgentInput& self, std::span<const AgentInput> neighbors,
                      std::span<const Obstacle> obstacles, const PlannerConfig& cfg);

/// All agents from one snapshot. Output i belongs to agent i.
std::vector<Vec2> step_all(std::span<const AgentInput> agents, std::span<const Obstacle> obstacles,
                           const PlannerConfig& cfg);

Vec2 effective_center(const Pose2& pose, double offset);

struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
};

/// Wheel speeds whose forward kinematics move the effective center with
/// velocity v_cmd.
WheelSpeeds wheel_speeds(const Vec2& v_cmd, const Pose2& pose, double offset, double wheel_base);

/// Unicycle forward kinematics integrated exactly over dt (arc motion).
Pose2 integrate_unicycle(const Pose2& pose, const WheelSpeeds& w, double wheel_base, double dt);

}  // namespace swarm
