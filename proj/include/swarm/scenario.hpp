#pragma once

// Scenario description: robots, algorithm, hand source, arena, obstacles and
// the tunables of every pipeline stage. Loaded from JSON; the schema is
// documented in docs/scenario-format.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "swarm/assignment.hpp"
#include "swarm/drive_control.hpp"
#include "swarm/formation.hpp"
#include "swarm/graycode.hpp"
#include "swarm/hand_model.hpp"
#include "swarm/rvo_planner.hpp"

namespace swarm {

enum class Algorithm : std::uint8_t { BoneStatic, BoneDynamic, SilhouetteDynamic };

/// Accepts both `bone_dynamic` and `bone-dynamic` spellings.
std::optional<Algorithm> parse_algorithm(std::string_view s);
std::string_view algorithm_name(Algorithm a);  // bone_dynamic style
Generator generator_of(Algorithm a);
AssignmentMode assignment_mode_of(Algorithm a);

struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  Vec2 center() const { return 0.5 * (min + max); }
  bool operator==(const Rect&) const = default;
};

enum class Placement : std::uint8_t { Formation, Random, Explicit };

struct RobotsSpec {
  RobotSize size = RobotSize::Mm30;
  Density density = Density::Sparse;
  std::optional<std::size_t> count;  // overrides the density table
  Placement placement = Placement::Formation;
  std::vector<Pose2> poses;          // explicit placement
  std::optional<Rect> region;        // random placement, defaults to the arena
  double heading = kPi / 2.0;        // formation placement
  std::optional<double> wheel_base;  // default 0.8 * diameter

  double radius() const { return robot_radius(size); }
  double resolved_wheel_base() const;
};

enum class HandSourceType : std::uint8_t { None, Trajectory, Script, Fixed, Reaching, Live };

std::string_view hand_source_name(HandSourceType t);

/// Reaching task: the hand waits in the start area with start_sign until
/// every robot has stayed there for dwell_s, then a target appears and the
/// hand reaches it with a minimum-jerk profile over reach_s.
struct TaskSpec {
  Rect start_area{{-150.0, -150.0}, {150.0, 150.0}};
  Vec2 target_offset{173.0, 300.0};  // |lateral|, forward from start-area centre
  double dwell_s = 2.0;
  double window_s = 5.0;
  double fit_tolerance = 10.0;  // mm
  double reach_s = 1.5;
  bool stop_after_window = true;
};

struct ReachingSpec {
  SignName sign = SignName::Paper;
  SignName start_sign = SignName::Paper;
  bool right = true;      // target side
  double yaw = kPi / 2.0; // fingers away from the user
  double scale = 1.0;
};

struct HandSourceSpec {
  HandSourceType type = HandSourceType::None;
  std::filesystem::path path;          // trajectory
  std::vector<HandKeyframe> keyframes; // script
  std::vector<Vec2> points;            // fixed goals
  bool identity_binding = false;       // fixed: static binding robot i -> goal i
  ReachingSpec reaching;
  double rate_hz = 50.0;               // sensing cadence
};

struct OutputsSpec {
  std::filesystem::path trace;
  std::filesystem::path metrics;
};

struct GraycodeSpec {
  bool enabled = false;  // robots localize through the projector model
  GrayCodeConfig config{10, 4.0, {-2048.0, -2048.0}, {Vec2{-10.0, 0.0}, Vec2{10.0, 0.0}}};
};

struct ScenarioSpec {
  std::string name = "scenario";
  RobotsSpec robots;
  Algorithm algorithm = Algorithm::BoneDynamic;
  HandSourceSpec hand_source;
  Rect arena{{-600.0, -400.0}, {600.0, 800.0}};
  std::vector<Obstacle> obstacles;
  ControlGains gains;
  CalibrationCurve calibration_left = CalibrationCurve::identity(400.0);
  CalibrationCurve calibration_right = CalibrationCurve::identity(400.0);
  PlannerConfig planner;
  bool planner_offset_set = false;  // otherwise D = radius / 2
  double preferred_velocity_gain = 10.0;  // 1/s, planner goal attraction
  bool wheel_limits = true;               // planner respects the wheel envelope
  GraycodeSpec graycode;
  OutputsSpec outputs;
  std::optional<TaskSpec> task;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> kmeans_seed;
  int kmeans_max_iters = 100;
  CostMetric cost_metric = CostMetric::Squared;
  std::optional<double> duration_s;
  double command_period = 0.1;  // s
  std::vector<AnchorLayout> layouts = default_layouts();

  /// Robot count after the Table 1 lookup or explicit override.
  std::size_t robot_count() const;
  /// Throws ValidationError/ConfigError on inconsistent settings.
  void validate() const;
};

/// Parses a scenario. Relative paths inside are resolved against base_dir.
/// Throws ConfigError on schema errors.
ScenarioSpec parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

}  // namespace swarm
