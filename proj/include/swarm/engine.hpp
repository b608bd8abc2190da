#pragma once

// Deterministic tick engine. Each physics tick runs
//   sense -> formation -> assign -> plan -> command -> drive -> integrate
//   -> contacts -> record
// Hand frames are sensed on the hand clock, planner positions are handed to
// the robots as waypoints on the command clock, everything else runs every
// tick. The planner simulates one differential-drive "lead" robot per
// physical robot; the physical robot chases its lead's position.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarm/assignment.hpp"
#include "swarm/drive_control.hpp"
#include "swarm/formation.hpp"
#include "swarm/hand_model.hpp"
#include "swarm/rvo_planner.hpp"
#include "swarm/scenario.hpp"

namespace swarm {

struct RobotState {
  int id = 0;
  Pose2 pose;
  double radius = 15.0;
  double wheel_base = 24.0;
  Vec2 velocity;  // after contact handling, mm/s
  WheelCommand command;
  DriveState drive;
};

/// Planner-side robot.
struct LeadState {
  Pose2 pose;
  Vec2 velocity;  // effective-center velocity, mm/s
};

struct ContactEvent {
  int a = 0;
  int b = -1;  // -1: obstacle or arena wall
};

struct Metrics {
  double mean_tracking_error = 0.0;  // mm, averaged over ticks and robots
  double max_tracking_error = 0.0;   // mm
  std::uint64_t collision_count = 0;
  double total_travel = 0.0;      // mm, physical robots
  double commanded_travel = 0.0;  // mm, planner robots
  std::optional<double> time_to_fit;  // s
  std::uint64_t reassignment_count = 0;
  std::uint64_t ticks = 0;

  bool operator==(const Metrics&) const = default;
};

struct RobotRecord {
  int id = 0;
  Pose2 pose;
  Vec2 goal;  // current drive waypoint
  WheelCommand command;
  bool converged = false;

  bool operator==(const RobotRecord&) const = default;
};

struct TickRecord {
  std::uint64_t tick = 0;
  double t = 0.0;
  std::optional<double> hand_t;  // timestamp of the frame sensed this tick
  std::vector<int> hand_ids;
  std::optional<std::string> generator;     // set when the formation was rebuilt
  std::vector<Vec2> formation;              // idem
  std::vector<std::uint64_t> formation_ids; // idem
  std::vector<std::size_t> assignment;      // idem
  std::optional<double> assignment_cost;
  std::optional<double> static_cost;  // cost of the t = 0 binding on this frame
  std::vector<RobotRecord> robots;
  std::vector<std::pair<int, int>> collisions;
  std::vector<int> clamped;
  std::vector<std::pair<int, std::size_t>> reassigned;  // robot, new subgoal index
  std::vector<std::string> inputs;  // live messages applied at this tick boundary
  Metrics metrics;

  bool operator==(const TickRecord&) const = default;
};

nlohmann::ordered_json to_json(const Metrics& m);
Metrics metrics_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TickRecord& r);
TickRecord tick_record_from_json(const nlohmann::json& j);
/// One record per line, stable field order.
std::string serialize_tick(const TickRecord& r);

/// Global assignment of robots to the union of several hands' subgoals.
/// Returns the robot -> combined-subgoal permutation and the hand each robot
/// ends up on. Throws ValidationError when the subgoal total differs from
/// the robot count.
struct HandRouting {
  Assignment assignment;
  std::vector<int> hand_of_robot;
};
HandRouting route_hands(std::span<const Vec2> robots, std::span<const SubgoalFormation> hands,
                        CostMetric metric = CostMetric::Squared);

/// Pushes overlapping discs apart along their centre line (half the
/// penetration each), pushes discs out of obstacles and arena walls, and
/// zeroes velocity components into each contact. `active` holds pairs in
/// contact since their last separation; new pairs are returned as events.
std::vector<ContactEvent> resolve_contacts(std::vector<RobotState>& robots,
                                           std::span<const Obstacle> obstacles,
                                           const std::optional<Rect>& arena,
                                           std::set<std::pair<int, int>>& active);

/// Schema check for a live input message. Returns an empty string when the
/// message is well formed, otherwise a description of the problem.
/// Accepted types: hand, hand_remove, config, obstacle_add.
std::string check_input(const nlohmann::json& msg);

class Engine {
 public:
  /// Validates the scenario, loads its hand source and places the robots.
  /// Throws ConfigError for unreadable inputs.
  explicit Engine(ScenarioSpec spec);

  /// Ticks to run for a batch scenario (0 for an empty trajectory).
  std::uint64_t planned_ticks() const { return planned_ticks_; }
  bool finished() const;

  TickRecord step();

  /// Live inputs, applied at the start of the next step in call order. The
  /// raw text is echoed into that step's record.
  void push_input(const nlohmann::json& msg);

  /// Problems met while applying inputs during the last step (for example a
  /// density with no layout); the offending input is ignored.
  const std::vector<std::string>& input_errors() const { return input_errors_; }

  /// Runs until finished(), writing one line per tick when trace != nullptr.
  Metrics run(std::ostream* trace);

  const Metrics& metrics() const { return metrics_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const std::vector<LeadState>& leads() const { return leads_; }
  const std::vector<Vec2>& subgoals() const { return subgoals_; }
  const std::vector<std::size_t>& assignment() const { return perm_; }
  const ScenarioSpec& spec() const { return spec_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  std::uint64_t tick_index() const { return tick_; }
  double time() const;
  Generator generator() const { return generator_of(spec_.algorithm); }
  std::optional<double> task_start() const { return task_start_; }
  std::uint64_t formation_tick() const { return formation_tick_; }
  std::uint64_t input_tick() const { return input_tick_; }

 private:
  void place_robots();
  void add_robot(const Pose2& pose);
  void resize_swarm(std::size_t n);
  void apply_input(const nlohmann::json& msg, TickRecord& rec);
  std::vector<HandFrame> sense(double t);
  void rebuild_formation(const std::vector<HandFrame>& hands, TickRecord& rec, std::size_t n);
  void assign(TickRecord& rec);
  void plan();
  void command(bool command_tick);
  void integrate();
  void contacts(TickRecord& rec);
  void update_metrics(TickRecord& rec);
  void update_task(double t);
  FormationConfig formation_config(std::size_t k) const;
  std::size_t hand_every() const;
  std::size_t command_every() const;
  double planner_offset() const;
  std::string split_error(std::size_t n, std::size_t hands) const;

  ScenarioSpec spec_;
  HandTrajectory trajectory_;
  std::vector<int> trajectory_hands_;
  std::map<int, HandFrame> live_hands_;

  std::vector<RobotState> robots_;
  std::vector<LeadState> leads_;
  std::vector<Obstacle> obstacles_;
  std::vector<Vec2> subgoals_;
  std::vector<std::uint64_t> subgoal_ids_;
  std::vector<std::size_t> perm_;
  std::optional<std::vector<std::size_t>> static_binding_;
  std::set<std::pair<int, int>> active_contacts_;
  std::vector<nlohmann::json> pending_inputs_;
  std::vector<std::string> input_errors_;
  std::uint64_t next_silhouette_id_ = 0;
  int next_robot_id_ = 0;

  std::uint64_t tick_ = 0;
  std::uint64_t planned_ticks_ = 0;
  std::uint64_t formation_tick_ = 0;
  std::uint64_t input_tick_ = 0;
  Metrics metrics_;
  double error_sum_ = 0.0;
  std::uint64_t error_samples_ = 0;

  // reaching task
  std::optional<double> in_area_since_;
  std::optional<double> task_start_;
};

/// Loads the scenario, runs it, and writes trace and metrics to the given
/// paths (falling back to the scenario's outputs section).
Metrics run_scenario(const ScenarioSpec& spec, const std::filesystem::path& trace_path = {},
                     const std::filesystem::path& metrics_path = {});

/// Replays a live-session input log (lines of {"tick": k, "msg": {...}}
/// followed by {"end_tick": n}) against the scenario.
Metrics replay_input_log(const ScenarioSpec& spec, std::istream& log, std::ostream* trace);

}  // namespace swarm
