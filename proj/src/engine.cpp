#include "swarm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "swarm/errors.hpp"
#include "swarm/graycode.hpp"

namespace swarm {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();
constexpr double kReachingMaxDuration = 60.0;
constexpr double kDefaultDuration = 10.0;
constexpr double kSeparationSlack = 1e-6;

double unit_random(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

std::uint64_t ticks_for(double seconds, double dt) {
  return static_cast<std::uint64_t>(std::llround(seconds / dt));
}

ordered_json vec_json(const Vec2& v) { return ordered_json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

bool overlaps_obstacle(const Vec2& p, double r, std::span<const Obstacle> obstacles) {
  for (const Obstacle& o : obstacles) {
    if (inside_polygon(p, o.polygon)) return true;
    const std::size_t m = o.polygon.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec2 q = closest_on_segment(p, o.polygon[i], o.polygon[(i + 1) % m]);
      if (distance(p, q) < r) return true;
    }
  }
  return false;
}

// Orders an obstacle counterclockwise.
Obstacle ccw(Obstacle o) {
  if (signed_area(o.polygon) < 0.0) std::reverse(o.polygon.begin(), o.polygon.end());
  return o;
}

}  // namespace

// ---------------------------------------------------------------------------
// serialization

ordered_json to_json(const Metrics& m) {
  ordered_json j;
  j["mean_tracking_error"] = m.mean_tracking_error;
  j["max_tracking_error"] = m.max_tracking_error;
  j["collision_count"] = m.collision_count;
  j["total_travel"] = m.total_travel;
  j["commanded_travel"] = m.commanded_travel;
  j["time_to_fit"] = m.time_to_fit ? ordered_json(*m.time_to_fit) : ordered_json(nullptr);
  j["reassignment_count"] = m.reassignment_count;
  j["ticks"] = m.ticks;
  return j;
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.mean_tracking_error = j.at("mean_tracking_error").get<double>();
  m.max_tracking_error = j.at("max_tracking_error").get<double>();
  m.collision_count = j.at("collision_count").get<std::uint64_t>();
  m.total_travel = j.at("total_travel").get<double>();
  m.commanded_travel = j.at("commanded_travel").get<double>();
  if (!j.at("time_to_fit").is_null()) m.time_to_fit = j.at("time_to_fit").get<double>();
  m.reassignment_count = j.at("reassignment_count").get<std::uint64_t>();
  m.ticks = j.at("ticks").get<std::uint64_t>();
  return m;
}

ordered_json to_json(const TickRecord& r) {
  ordered_json j;
  j["tick"] = r.tick;
  j["t"] = r.t;
  if (!r.inputs.empty()) j["inputs"] = r.inputs;
  if (r.hand_t) {
    j["hand_t"] = *r.hand_t;
    j["hands"] = r.hand_ids;
  }
  if (r.generator) {
    j["generator"] = *r.generator;
    ordered_json pts = ordered_json::array();
    for (const Vec2& p : r.formation) pts.push_back(vec_json(p));
    j["formation"] = std::move(pts);
    j["formation_ids"] = r.formation_ids;
    j["assignment"] = r.assignment;
  }
  if (r.assignment_cost) j["assignment_cost"] = *r.assignment_cost;
  if (r.static_cost) j["static_cost"] = *r.static_cost;
  ordered_json robots = ordered_json::array();
  for (const RobotRecord& rr : r.robots) {
    ordered_json o;
    o["id"] = rr.id;
    o["x"] = rr.pose.position.x;
    o["y"] = rr.pose.position.y;
    o["heading"] = rr.pose.heading;
    o["goal"] = vec_json(rr.goal);
    o["v_l"] = rr.command.v_l;
    o["v_r"] = rr.command.v_r;
    o["duty_l"] = rr.command.duty_l;
    o["duty_r"] = rr.command.duty_r;
    o["converged"] = rr.converged;
    robots.push_back(std::move(o));
  }
  j["robots"] = std::move(robots);
  if (!r.collisions.empty()) {
    ordered_json c = ordered_json::array();
    for (const auto& [a, b] : r.collisions) c.push_back({a, b});
    j["collisions"] = std::move(c);
  }
  if (!r.clamped.empty()) j["clamped"] = r.clamped;
  if (!r.reassigned.empty()) {
    ordered_json c = ordered_json::array();
    for (const auto& [robot, goal] : r.reassigned) c.push_back({robot, goal});
    j["reassigned"] = std::move(c);
  }
  j["metrics"] = to_json(r.metrics);
  return j;
}

TickRecord tick_record_from_json(const json& j) {
  TickRecord r;
  r.tick = j.at("tick").get<std::uint64_t>();
  r.t = j.at("t").get<double>();
  if (j.contains("inputs")) r.inputs = j.at("inputs").get<std::vector<std::string>>();
  if (j.contains("hand_t")) {
    r.hand_t = j.at("hand_t").get<double>();
    r.hand_ids = j.at("hands").get<std::vector<int>>();
  }
  if (j.contains("generator")) {
    r.generator = j.at("generator").get<std::string>();
    for (const json& p : j.at("formation")) r.formation.push_back(vec_from(p));
    r.formation_ids = j.at("formation_ids").get<std::vector<std::uint64_t>>();
    r.assignment = j.at("assignment").get<std::vector<std::size_t>>();
  }
  if (j.contains("assignment_cost")) r.assignment_cost = j.at("assignment_cost").get<double>();
  if (j.contains("static_cost")) r.static_cost = j.at("static_cost").get<double>();
  for (const json& o : j.at("robots")) {
    RobotRecord rr;
    rr.id = o.at("id").get<int>();
    rr.pose.position = {o.at("x").get<double>(), o.at("y").get<double>()};
    rr.pose.heading = o.at("heading").get<double>();
    rr.goal = vec_from(o.at("goal"));
    rr.command.v_l = o.at("v_l").get<double>();
    rr.command.v_r = o.at("v_r").get<double>();
    rr.command.duty_l = o.at("duty_l").get<double>();
    rr.command.duty_r = o.at("duty_r").get<double>();
    rr.converged = o.at("converged").get<bool>();
    rr.command.converged = rr.converged;
    r.robots.push_back(rr);
  }
  if (j.contains("collisions")) {
    for (const json& c : j.at("collisions")) r.collisions.emplace_back(c.at(0), c.at(1));
  }
  if (j.contains("clamped")) r.clamped = j.at("clamped").get<std::vector<int>>();
  if (j.contains("reassigned")) {
    for (const json& c : j.at("reassigned")) {
      r.reassigned.emplace_back(c.at(0).get<int>(), c.at(1).get<std::size_t>());
    }
  }
  r.metrics = metrics_from_json(j.at("metrics"));
  return r;
}

std::string serialize_tick(const TickRecord& r) { return to_json(r).dump(); }

// ---------------------------------------------------------------------------
// multi-hand routing and contacts

HandRouting route_hands(std::span<const Vec2> robots, std::span<const SubgoalFormation> hands,
                        CostMetric metric) {
  std::vector<Vec2> all;
  std::vector<int> owner;
  for (const SubgoalFormation& f : hands) {
    all.insert(all.end(), f.points.begin(), f.points.end());
    owner.insert(owner.end(), f.points.size(), f.hand_id);
  }
  if (all.size() != robots.size()) {
    throw ValidationError("route_hands: " + std::to_string(all.size()) + " subgoals for " +
                          std::to_string(robots.size()) + " robots");
  }
  HandRouting out;
  out.assignment = solve_lsap(CostMatrix::from_positions(robots, all, metric));
  for (const std::size_t j : out.assignment.perm) out.hand_of_robot.push_back(owner[j]);
  return out;
}

std::vector<ContactEvent> resolve_contacts(std::vector<RobotState>& robots,
                                           std::span<const Obstacle> obstacles,
                                           const std::optional<Rect>& arena,
                                           std::set<std::pair<int, int>>& active) {
  std::vector<ContactEvent> events;
  const std::size_t n = robots.size();
  auto key = [&](std::size_t i, std::size_t j) {
    return std::minmax(robots[i].id, robots[j].id);
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(robots[i].pose.position, robots[j].pose.position);
      const double s = robots[i].radius + robots[j].radius;
      if (d < s - kSeparationSlack) {
        if (active.insert(key(i, j)).second) events.push_back({key(i, j).first, key(i, j).second});
      }
    }
  }

  constexpr int kMaxPasses = 200;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        RobotState& a = robots[i];
        RobotState& b = robots[j];
        const Vec2 delta = b.pose.position - a.pose.position;
        const double d = norm(delta);
        const double s = a.radius + b.radius;
        if (d >= s) continue;
        const Vec2 normal = d > 0.0 ? delta / d : Vec2(1.0, 0.0);
        const double half = 0.5 * (s - d);
        a.pose.position -= normal * half;
        b.pose.position += normal * half;
        if (const double va = dot(a.velocity, normal); va > 0.0) a.velocity -= normal * va;
        if (const double vb = dot(b.velocity, normal); vb < 0.0) b.velocity -= normal * vb;
        moved = moved || s - d > 1e-12;
      }
    }
    for (RobotState& r : robots) {
      for (const Obstacle& o : obstacles) {
        const Vec2 p = r.pose.position;
        const bool inside = inside_polygon(p, o.polygon);
        Vec2 best;
        double best_d = std::numeric_limits<double>::infinity();
        const std::size_t m = o.polygon.size();
        for (std::size_t k = 0; k < m; ++k) {
          const Vec2 q = closest_on_segment(p, o.polygon[k], o.polygon[(k + 1) % m]);
          const double d = distance(p, q);
          if (d < best_d) {
            best_d = d;
            best = q;
          }
        }
        if (!inside && best_d >= r.radius) continue;
        Vec2 normal;
        if (best_d > 0.0) {
          normal = inside ? (best - p) / best_d : (p - best) / best_d;
        } else {
          normal = Vec2(1.0, 0.0);
        }
        r.pose.position = best + normal * r.radius;
        if (const double v = dot(r.velocity, normal); v < 0.0) r.velocity -= normal * v;
        moved = true;
      }
      if (arena) {
        Vec2& p = r.pose.position;
        const double x = std::clamp(p.x, arena->min.x + r.radius, arena->max.x - r.radius);
        const double y = std::clamp(p.y, arena->min.y + r.radius, arena->max.y - r.radius);
        if (x != p.x) r.velocity.x = 0.0;
        if (y != p.y) r.velocity.y = 0.0;
        p = {x, y};
      }
    }
    if (!moved) break;
  }

  for (auto it = active.begin(); it != active.end();) {
    const RobotState* a = nullptr;
    const RobotState* b = nullptr;
    for (const RobotState& r : robots) {
      if (r.id == it->first) a = &r;
      if (r.id == it->second) b = &r;
    }
    if (!a || !b ||
        distance(a->pose.position, b->pose.position) > a->radius + b->radius + kSeparationSlack) {
      it = active.erase(it);
    } else {
      ++it;
    }
  }
  return events;
}

// ---------------------------------------------------------------------------
// live input schema

std::string check_input(const json& msg) {
  if (!msg.is_object()) return "message must be a JSON object";
  if (!msg.contains("type") || !msg["type"].is_string()) return "missing string field 'type'";
  const std::string type = msg["type"].get<std::string>();
  auto num = [&](const char* k, bool required) -> std::string {
    if (!msg.contains(k)) return required ? std::string("missing field '") + k + "'" : "";
    if (!msg[k].is_number() || !std::isfinite(msg[k].get<double>())) {
      return std::string("field '") + k + "' must be a finite number";
    }
    return "";
  };
  auto allowed = [&](std::initializer_list<const char*> keys) -> std::string {
    for (auto it = msg.begin(); it != msg.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        return "unknown field '" + it.key() + "'";
      }
    }
    return "";
  };
  std::string err;
  if (type == "hand") {
    if (!(err = allowed({"type", "x", "y", "yaw", "sign", "palm_up", "scale", "hand_id"})).empty()) {
      return err;
    }
    for (const char* k : {"x", "y"}) {
      if (!(err = num(k, true)).empty()) return err;
    }
    for (const char* k : {"yaw", "scale"}) {
      if (!(err = num(k, false)).empty()) return err;
    }
    if (msg.contains("scale") && !(msg["scale"].get<double>() > 0.0)) return "scale must be > 0";
    if (msg.contains("hand_id") &&
        !(msg["hand_id"].is_number_integer() && msg["hand_id"].get<std::int64_t>() >= 0 &&
          msg["hand_id"].get<std::int64_t>() < 16)) {
      return "hand_id must be an integer in [0, 16)";
    }
    if (msg.contains("palm_up") && !msg["palm_up"].is_boolean()) return "palm_up must be boolean";
    if (!msg.contains("sign") || !msg["sign"].is_string()) return "missing string field 'sign'";
    const auto sign = parse_sign(msg["sign"].get<std::string>());
    if (!sign) return "unknown sign '" + msg["sign"].get<std::string>() + "'";
    try {
      hand_sign(*sign, msg.value("palm_up", *sign == SignName::ReversedPaper));
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  }
  if (type == "hand_remove") {
    if (!(err = allowed({"type", "hand_id"})).empty()) return err;
    if (!msg.contains("hand_id") || !msg["hand_id"].is_number_integer()) {
      return "missing integer field 'hand_id'";
    }
    return "";
  }
  if (type == "config") {
    if (!(err = allowed({"type", "algorithm", "density", "size"})).empty()) return err;
    if (msg.contains("algorithm")) {
      if (!msg["algorithm"].is_string()) return "algorithm must be a string";
      if (!parse_algorithm(msg["algorithm"].get<std::string>())) {
        return "unknown algorithm '" + msg["algorithm"].get<std::string>() + "'";
      }
    }
    if (msg.contains("density")) {
      if (!msg["density"].is_string() || !parse_density(msg["density"].get<std::string>())) {
        return "density must be sparse, medium or dense";
      }
    }
    if (msg.contains("size")) {
      if (!msg["size"].is_number_integer() || !robot_size_from_mm(msg["size"].get<int>())) {
        return "size must be 20 or 30";
      }
    }
    return "";
  }
  if (type == "obstacle_add") {
    if (!(err = allowed({"type", "polygon"})).empty()) return err;
    if (!msg.contains("polygon") || !msg["polygon"].is_array()) return "missing list 'polygon'";
    Obstacle o;
    for (const json& p : msg["polygon"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        return "polygon vertices must be [x, y]";
      }
      o.polygon.push_back(vec_from(p));
    }
    try {
      ccw(o).validate();
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  }
  return "unknown message type '" + type + "'";
}

// ---------------------------------------------------------------------------
// engine

Engine::Engine(ScenarioSpec spec) : spec_(std::move(spec)) {
  try {
    spec_.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  obstacles_ = spec_.obstacles;

  const HandSourceSpec& hs = spec_.hand_source;
  if (hs.type == HandSourceType::Trajectory) {
    try {
      trajectory_ = load_trajectory(hs.path);
    } catch (const ParseError& e) {
      throw ConfigError(hs.path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ConfigError(hs.path.string() + ": " + e.what());
    }
  } else if (hs.type == HandSourceType::Script) {
    trajectory_ = script_trajectory(hs.keyframes, hs.rate_hz);
  }
  trajectory_hands_ = trajectory_.hand_ids();
  if (generator() == Generator::Silhouette) {
    for (const HandFrame& f : trajectory_.frames) {
      if (f.mesh.empty()) throw ModeError("silhouette generation needs mesh samples");
    }
  }

  const double dt = spec_.planner.dt;
  if (spec_.duration_s) {
    planned_ticks_ = ticks_for(*spec_.duration_s, dt);
  } else if (hs.type == HandSourceType::Trajectory || hs.type == HandSourceType::Script) {
    planned_ticks_ = trajectory_.empty()
                         ? 0
                         : static_cast<std::uint64_t>(
                               std::floor(trajectory_.frames.back().t / dt + 1e-9)) + 1;
  } else if (hs.type == HandSourceType::Reaching) {
    planned_ticks_ = ticks_for(kReachingMaxDuration, dt);
  } else if (hs.type == HandSourceType::Live) {
    planned_ticks_ = kUnbounded;
  } else {
    planned_ticks_ = ticks_for(kDefaultDuration, dt);
  }
  place_robots();
}

double Engine::time() const { return static_cast<double>(tick_) * spec_.planner.dt; }

std::size_t Engine::hand_every() const {
  return static_cast<std::size_t>(std::llround(1.0 / (spec_.hand_source.rate_hz * spec_.planner.dt)));
}

std::size_t Engine::command_every() const {
  return static_cast<std::size_t>(std::llround(spec_.command_period / spec_.planner.dt));
}

double Engine::planner_offset() const {
  return spec_.planner_offset_set ? spec_.planner.effective_center_offset
                                  : spec_.robots.radius() / 2.0;
}

bool Engine::finished() const {
  if (tick_ >= planned_ticks_) return true;
  if (spec_.task && spec_.task->stop_after_window && task_start_) {
    return time() >= *task_start_ + spec_.task->window_s - 1e-9;
  }
  return false;
}

void Engine::add_robot(const Pose2& pose) {
  RobotState r;
  r.id = next_robot_id_++;
  r.pose = pose;
  r.radius = spec_.robots.radius();
  r.wheel_base = spec_.robots.resolved_wheel_base();
  r.drive.p_n = pose.position;
  r.drive.p_g = pose.position;
  r.drive.heading = pose.heading;
  r.drive.converged = true;
  robots_.push_back(r);
  leads_.push_back({pose, {}});
}

void Engine::place_robots() {
  const std::size_t n = spec_.robot_count();
  const RobotsSpec& rs = spec_.robots;
  std::vector<Pose2> poses;
  if (rs.placement == Placement::Explicit) {
    poses = rs.poses;
  } else if (rs.placement == Placement::Random) {
    std::mt19937_64 rng(spec_.seed);
    const Rect region = rs.region.value_or(spec_.arena);
    const double r = rs.radius();
    for (std::size_t i = 0; i < n; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 100000 && !placed; ++attempt) {
        const Vec2 p(region.min.x + r + (region.max.x - region.min.x - 2 * r) * unit_random(rng),
                     region.min.y + r + (region.max.y - region.min.y - 2 * r) * unit_random(rng));
        const double heading = -kPi + 2.0 * kPi * unit_random(rng);
        if (overlaps_obstacle(p, r, obstacles_)) continue;
        if (std::any_of(poses.begin(), poses.end(),
                        [&](const Pose2& q) { return distance(q.position, p) < 2.0 * r + 2.0; })) {
          continue;
        }
        poses.push_back({p, heading});
        placed = true;
      }
      if (!placed) throw ConfigError("random placement: region too small for the robots");
    }
  } else {
    std::vector<Vec2> pts;
    if (spec_.hand_source.type == HandSourceType::Fixed) {
      pts = spec_.hand_source.points;
    } else {
      const std::vector<HandFrame> hands = sense(0.0);
      if (!hands.empty()) {
        TickRecord scratch;
        rebuild_formation(hands, scratch, n);
        if (subgoals_.size() == n) pts = subgoals_;
        subgoals_.clear();
        subgoal_ids_.clear();
        next_silhouette_id_ = 0;
      }
    }
    if (pts.size() != n) {
      // no hand at t = 0: a compact grid around the arena centre
      const double pitch = 2.0 * rs.radius() + 10.0;
      const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      const Vec2 c = spec_.task ? spec_.task->start_area.center() : spec_.arena.center();
      pts.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const double gx = static_cast<double>(i % cols) - 0.5 * static_cast<double>(cols - 1);
        const double gy = static_cast<double>(i / cols) - 0.5 * static_cast<double>((n - 1) / cols);
        pts.push_back(c + Vec2(gx * pitch, gy * pitch));
      }
    }
    for (const Vec2& p : pts) poses.push_back({p, rs.heading});
  }
  for (const Pose2& p : poses) add_robot(p);

  // discs placed on overlapping subgoals start separated
  std::set<std::pair<int, int>> scratch;
  resolve_contacts(robots_, obstacles_, spec_.arena, scratch);
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    robots_[i].drive.p_n = robots_[i].pose.position;
    robots_[i].drive.p_g = robots_[i].pose.position;
    robots_[i].velocity = {};
    leads_[i].pose = robots_[i].pose;
  }
}

void Engine::resize_swarm(std::size_t n) {
  while (robots_.size() > n) {
    robots_.pop_back();
    leads_.pop_back();
  }
  if (robots_.size() < n) {
    const double r = spec_.robots.radius();
    const double pitch = 2.0 * r + 10.0;
    Vec2 c = spec_.arena.center();
    if (!robots_.empty()) {
      c = {};
      for (const RobotState& rb : robots_) c += rb.pose.position;
      c = c / static_cast<double>(robots_.size());
    }
    // square spiral of grid cells around the swarm centroid
    for (int ring = 0; robots_.size() < n && ring < 1000; ++ring) {
      for (int gy = -ring; gy <= ring && robots_.size() < n; ++gy) {
        for (int gx = -ring; gx <= ring && robots_.size() < n; ++gx) {
          if (std::max(std::abs(gx), std::abs(gy)) != ring) continue;
          const Vec2 p = c + Vec2(gx * pitch, gy * pitch);
          if (!Rect{spec_.arena.min + Vec2(r, r), spec_.arena.max - Vec2(r, r)}.contains(p)) continue;
          if (overlaps_obstacle(p, r, obstacles_)) continue;
          bool free = true;
          for (const RobotState& rb : robots_) {
            if (distance(rb.pose.position, p) < rb.radius + r + 2.0) free = false;
          }
          if (free) add_robot({p, spec_.robots.heading});
        }
      }
    }
  }
  perm_.clear();
  static_binding_.reset();
  active_contacts_.clear();
}

void Engine::push_input(const json& msg) { pending_inputs_.push_back(msg); }

void Engine::apply_input(const json& msg, TickRecord& rec) {
  rec.inputs.push_back(msg.dump());
  input_tick_ = tick_;
  const std::string err = check_input(msg);
  if (!err.empty()) {
    input_errors_.push_back(err);
    return;
  }
  const std::string type = msg["type"].get<std::string>();
  if (type == "hand") {
    const int id = msg.value("hand_id", 0);
    if (!live_hands_.count(id)) {
      if (const std::string e = split_error(robots_.size(), live_hands_.size() + 1); !e.empty()) {
        input_errors_.push_back(e);
        return;
      }
    }
    WristPose w;
    w.position = {msg["x"].get<double>(), msg["y"].get<double>()};
    w.yaw = msg.value("yaw", kPi / 2.0);
    const SignName sign = *parse_sign(msg["sign"].get<std::string>());
    const HandSign hs = hand_sign(sign, msg.value("palm_up", sign == SignName::ReversedPaper));
    live_hands_[id] = synth_hand_sign(hs, w, msg.value("scale", 1.0), id, time());
  } else if (type == "hand_remove") {
    live_hands_.erase(msg["hand_id"].get<int>());
  } else if (type == "config") {
    if (msg.contains("algorithm")) {
      spec_.algorithm = *parse_algorithm(msg["algorithm"].get<std::string>());
      static_binding_.reset();
    }
    RobotSize size = spec_.robots.size;
    Density density = spec_.robots.density;
    if (msg.contains("size")) size = *robot_size_from_mm(msg["size"].get<int>());
    if (msg.contains("density")) density = *parse_density(msg["density"].get<std::string>());
    if (size != spec_.robots.size || density != spec_.robots.density) {
      if (spec_.hand_source.type == HandSourceType::Fixed) {
        input_errors_.push_back("fixed-goal scenarios keep their robot count");
        return;
      }
      const RobotsSpec previous = spec_.robots;
      spec_.robots.size = size;
      spec_.robots.density = density;
      if (const std::string e = split_error(robot_count(size, density), live_hands_.size());
          !e.empty()) {
        spec_.robots = previous;
        input_errors_.push_back(e);
        return;
      }
      spec_.robots.count.reset();
      spec_.robots.wheel_base.reset();
      for (std::size_t i = 0; i < robots_.size(); ++i) {
        robots_[i].radius = spec_.robots.radius();
        robots_[i].wheel_base = spec_.robots.resolved_wheel_base();
      }
      resize_swarm(robot_count(size, density));
    }
  } else if (type == "obstacle_add") {
    Obstacle o;
    for (const json& p : msg["polygon"]) o.polygon.push_back(vec_from(p));
    obstacles_.push_back(ccw(std::move(o)));
  }
}

std::vector<HandFrame> Engine::sense(double t) {
  std::vector<HandFrame> out;
  switch (spec_.hand_source.type) {
    case HandSourceType::Trajectory:
    case HandSourceType::Script:
      for (const int id : trajectory_hands_) {
        double first = std::numeric_limits<double>::infinity();
        double last = -first;
        for (const HandFrame& f : trajectory_.frames) {
          if (f.hand_id != id) continue;
          first = std::min(first, f.t);
          last = std::max(last, f.t);
        }
        if (t < first) continue;
        out.push_back(interpolate_frame(trajectory_, std::min(t, last), id));
      }
      break;
    case HandSourceType::Reaching: {
      const TaskSpec& task = *spec_.task;
      const ReachingSpec& rs = spec_.hand_source.reaching;
      auto key_at = [&](SignName sign, const Vec2& center) {
        HandKeyframe k;
        k.wrist.yaw = rs.yaw;
        k.sign = sign;
        k.scale = rs.scale;
        const HandFrame probe = synth_hand_sign(hand_sign(sign), k.wrist, rs.scale);
        k.wrist.position = center - palm_center(probe);
        return k;
      };
      const Vec2 start_c = task.start_area.center();
      const Vec2 target_c =
          start_c + Vec2(rs.right ? task.target_offset.x : -task.target_offset.x,
                         task.target_offset.y);
      const HandKeyframe a = key_at(rs.start_sign, start_c);
      HandKeyframe b = key_at(rs.sign, target_c);
      // keep the wrist height and yaw of the start pose; sign blending happens at b's pose
      double s = 0.0;
      if (task_start_) s = min_jerk((t - *task_start_) / task.reach_s);
      out.push_back(blend_keyframes(a, b, s, t));
      break;
    }
    case HandSourceType::Live:
      for (const auto& [id, f] : live_hands_) {
        HandFrame g = f;
        g.t = t;
        out.push_back(std::move(g));
      }
      break;
    case HandSourceType::Fixed:
    case HandSourceType::None:
      break;
  }
  return out;
}

FormationConfig Engine::formation_config(std::size_t k) const {
  FormationConfig cfg;
  cfg.generator = generator();
  cfg.k = k;
  cfg.kmeans_seed = spec_.kmeans_seed.value_or(spec_.seed);
  cfg.kmeans_max_iters = spec_.kmeans_max_iters;
  if (cfg.generator == Generator::Bone) {
    const auto layout = layout_for_count(spec_.layouts, spec_.robots.size, k);
    if (!layout) {
      throw ValidationError("no anchor layout with " + std::to_string(k) + " anchors for " +
                            std::to_string(static_cast<int>(spec_.robots.size)) + " mm robots");
    }
    cfg.layout = *layout;
  }
  return cfg;
}

void Engine::rebuild_formation(const std::vector<HandFrame>& hands, TickRecord& rec,
                               std::size_t n) {
  std::vector<SubgoalFormation> forms;
  if (spec_.hand_source.type == HandSourceType::Fixed) {
    SubgoalFormation f;
    f.points = spec_.hand_source.points;
    for (std::size_t i = 0; i < f.points.size(); ++i) f.ids.push_back(i);
    f.generator = Generator::Fixed;
    forms.push_back(std::move(f));
  } else {
    if (hands.empty() || n % hands.size() != 0) return;
    const std::size_t k = n / hands.size();
    const FormationConfig cfg = formation_config(k);
    for (const HandFrame& h : hands) {
      SubgoalFormation f = generate_formation(h, cfg, next_silhouette_id_);
      if (cfg.generator == Generator::Silhouette) {
        next_silhouette_id_ += k;
      } else {
        for (auto& id : f.ids) id += static_cast<std::uint64_t>(h.hand_id) * 1000;
      }
      forms.push_back(std::move(f));
    }
  }
  subgoals_.clear();
  subgoal_ids_.clear();
  for (const SubgoalFormation& f : forms) {
    subgoals_.insert(subgoals_.end(), f.points.begin(), f.points.end());
    subgoal_ids_.insert(subgoal_ids_.end(), f.ids.begin(), f.ids.end());
  }
  rec.generator = std::string(generator_name(forms.front().generator));
  rec.formation = subgoals_;
  rec.formation_ids = subgoal_ids_;
  formation_tick_ = tick_;
}

void Engine::assign(TickRecord& rec) {
  const std::size_t n = robots_.size();
  if (subgoals_.size() != n) return;
  std::vector<Vec2> pos;
  for (const LeadState& l : leads_) pos.push_back(l.pose.position);
  const CostMatrix c = CostMatrix::from_positions(pos, subgoals_, spec_.cost_metric);
  if (!static_binding_ || static_binding_->size() != n) {
    if (spec_.hand_source.type == HandSourceType::Fixed && spec_.hand_source.identity_binding) {
      std::vector<std::size_t> id(n);
      for (std::size_t i = 0; i < n; ++i) id[i] = i;
      static_binding_ = id;
    } else {
      static_binding_ = solve_lsap(c).perm;
    }
  }
  std::vector<std::size_t> perm;
  const bool pinned =
      spec_.hand_source.type == HandSourceType::Fixed && spec_.hand_source.identity_binding;
  if (pinned || assignment_mode_of(spec_.algorithm) == AssignmentMode::Static) {
    if (generator() == Generator::Silhouette) {
      throw ModeError("static assignment is undefined for silhouette formations");
    }
    perm = assign_static({*static_binding_, 0.0, AssignmentMode::Static}, c, generator()).perm;
  } else {
    perm = solve_lsap(c).perm;
  }
  if (perm_.size() == n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] != perm_[i]) {
        rec.reassigned.emplace_back(robots_[i].id, perm[i]);
        ++metrics_.reassignment_count;
      }
    }
  }
  perm_ = std::move(perm);
  rec.assignment = perm_;
  rec.assignment_cost = c.cost_of(perm_);
  rec.static_cost = c.cost_of(*static_binding_);
}

void Engine::plan() {
  const std::size_t n = robots_.size();
  const double d_off = planner_offset();
  PlannerConfig cfg = spec_.planner;
  cfg.effective_center_offset = d_off;
  const bool have_goals = perm_.size() == n && subgoals_.size() == n;
  std::vector<AgentInput> agents(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LeadState& l = leads_[i];
    const Vec2 goal = have_goals ? subgoals_[perm_[i]] : l.pose.position;
    AgentInput& a = agents[i];
    a.position = effective_center(l.pose, d_off);
    a.velocity = l.velocity;
    a.radius = robots_[i].radius + d_off;
    // driving the offset point toward goal + D * heading brings the axle onto the goal
    Vec2 pref = spec_.preferred_velocity_gain * (goal - l.pose.position);
    if (norm(pref) > cfg.max_speed) pref = normalized(pref) * cfg.max_speed;
    a.pref_velocity = pref;
    if (spec_.wheel_limits) {
      a.drive = DiffDriveLimits{l.pose.heading, robots_[i].wheel_base, spec_.gains.v_max()};
    }
  }
  const std::vector<Vec2> vel = step_all(agents, obstacles_, cfg);
  const double vmax = spec_.gains.v_max();
  for (std::size_t i = 0; i < n; ++i) {
    LeadState& l = leads_[i];
    WheelSpeeds w = wheel_speeds(vel[i], l.pose, d_off, robots_[i].wheel_base);
    w.left = std::clamp(w.left, -vmax, vmax);
    w.right = std::clamp(w.right, -vmax, vmax);
    const Pose2 next = integrate_unicycle(l.pose, w, robots_[i].wheel_base, cfg.dt);
    metrics_.commanded_travel += distance(next.position, l.pose.position);
    l.velocity = (effective_center(next, d_off) - agents[i].position) / cfg.dt;
    l.pose = next;
  }
}

namespace {

Pose2 graycode_pose(const Pose2& truth, const GrayCodeConfig& cfg) {
  auto read = [&](const Vec2& offset) {
    const Cell c = cell_of(truth.position + rotate(offset, truth.heading), cfg);
    const auto bits = sample_bits(c, cfg);
    return decode_bits(bits[0], bits[1], cfg);
  };
  const PhotodiodePose p =
      pose_from_photodiodes(read(cfg.sensor_offsets[0]), read(cfg.sensor_offsets[1]), cfg);
  return {p.position, p.orientation};
}

}  // namespace

std::string Engine::split_error(std::size_t n, std::size_t hands) const {
  if (hands == 0) return "";
  if (n % hands != 0) {
    return "cannot split " + std::to_string(n) + " robots evenly across " +
           std::to_string(hands) + " hands";
  }
  if (generator() == Generator::Bone &&
      !layout_for_count(spec_.layouts, spec_.robots.size, n / hands)) {
    return "no anchor layout with " + std::to_string(n / hands) + " anchors";
  }
  return "";
}

void Engine::command(bool command_tick) {
  const double dt = spec_.planner.dt;
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    RobotState& r = robots_[i];
    if (command_tick) r.drive.p_g = leads_[i].pose.position;
    const Pose2 sensed =
        spec_.graycode.enabled ? graycode_pose(r.pose, spec_.graycode.config) : r.pose;
    r.drive = observe(r.drive, sensed, r.drive.p_g, dt, spec_.gains.sigma);
    WheelCommand cmd = compute_wheel_command(r.drive, spec_.gains);
    cmd.duty_l = apply_calibration(cmd.v_l, spec_.calibration_left);
    cmd.duty_r = apply_calibration(cmd.v_r, spec_.calibration_right);
    r.command = cmd;
  }
}

void Engine::integrate() {
  const double dt = spec_.planner.dt;
  for (RobotState& r : robots_) {
    const Pose2 next =
        integrate_unicycle(r.pose, {r.command.v_l, r.command.v_r}, r.wheel_base, dt);
    r.velocity = (next.position - r.pose.position) / dt;
    r.pose = next;
  }
}

void Engine::contacts(TickRecord& rec) {
  for (const ContactEvent& e :
       resolve_contacts(robots_, obstacles_, spec_.arena, active_contacts_)) {
    rec.collisions.emplace_back(e.a, e.b);
    ++metrics_.collision_count;
  }
}

void Engine::update_task(double t) {
  if (!spec_.task || task_start_) return;
  const bool inside = std::all_of(robots_.begin(), robots_.end(), [&](const RobotState& r) {
    return spec_.task->start_area.contains(r.pose.position);
  });
  if (!inside) {
    in_area_since_.reset();
    return;
  }
  if (!in_area_since_) in_area_since_ = t;
  if (t - *in_area_since_ >= spec_.task->dwell_s - 1e-9) task_start_ = t;
}

void Engine::update_metrics(TickRecord& rec) {
  const std::size_t n = robots_.size();
  const double t_after = static_cast<double>(tick_ + 1) * spec_.planner.dt;
  if (n > 0 && perm_.size() == n && subgoals_.size() == n) {
    double sum = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = distance(robots_[i].pose.position, subgoals_[perm_[i]]);
      sum += e;
      worst = std::max(worst, e);
    }
    error_sum_ += sum / static_cast<double>(n);
    ++error_samples_;
    metrics_.mean_tracking_error = error_sum_ / static_cast<double>(error_samples_);
    metrics_.max_tracking_error = std::max(metrics_.max_tracking_error, worst);

    const double tol = spec_.task ? spec_.task->fit_tolerance : TaskSpec{}.fit_tolerance;
    if (!metrics_.time_to_fit && worst <= tol) {
      if (!spec_.task) {
        metrics_.time_to_fit = t_after;
      } else if (task_start_ && t_after >= *task_start_ + spec_.task->reach_s - 1e-9) {
        metrics_.time_to_fit = t_after - *task_start_;
      }
    }
  }
  metrics_.ticks = tick_ + 1;
  for (const RobotState& r : robots_) {
    rec.robots.push_back({r.id, r.pose, r.drive.p_g, r.command, r.command.converged});
    if (r.command.clamped) rec.clamped.push_back(r.id);
  }
  rec.metrics = metrics_;
}

TickRecord Engine::step() {
  TickRecord rec;
  rec.tick = tick_;
  rec.t = time();
  input_errors_.clear();
  const bool had_inputs = !pending_inputs_.empty();
  std::vector<json> inputs;
  inputs.swap(pending_inputs_);
  for (const json& msg : inputs) apply_input(msg, rec);

  const double t = time();
  update_task(t);

  if (spec_.hand_source.type == HandSourceType::Fixed) {
    if (subgoals_.size() != robots_.size()) {
      rebuild_formation({}, rec, robots_.size());
      assign(rec);
    }
  } else if (tick_ % hand_every() == 0 || had_inputs) {
    const std::vector<HandFrame> hands = sense(t);
    if (!hands.empty()) {
      rec.hand_t = t;
      for (const HandFrame& h : hands) rec.hand_ids.push_back(h.hand_id);
      if (split_error(robots_.size(), hands.size()).empty()) {
        rebuild_formation(hands, rec, robots_.size());
        assign(rec);
      }
    }
  }

  std::vector<Vec2> before;
  for (const RobotState& r : robots_) before.push_back(r.pose.position);
  plan();
  command(tick_ % command_every() == 0);
  integrate();
  contacts(rec);
  for (std::size_t i = 0; i < robots_.size(); ++i) {
    metrics_.total_travel += distance(before[i], robots_[i].pose.position);
  }
  update_metrics(rec);
  ++tick_;
  return rec;
}

Metrics Engine::run(std::ostream* trace) {
  if (planned_ticks_ == kUnbounded) {
    throw ConfigError("live scenario without duration_s: replay it from an input log");
  }
  while (!finished()) {
    const TickRecord rec = step();
    if (trace) *trace << serialize_tick(rec) << '\n';
  }
  return metrics_;
}

Metrics run_scenario(const ScenarioSpec& spec, const std::filesystem::path& trace_path,
                     const std::filesystem::path& metrics_path) {
  Engine engine(spec);
  if (engine.planned_ticks() == kUnbounded) engine.run(nullptr);  // throws before any file opens
  const std::filesystem::path tp = trace_path.empty() ? spec.outputs.trace : trace_path;
  const std::filesystem::path mp = metrics_path.empty() ? spec.outputs.metrics : metrics_path;
  std::ofstream trace;
  if (!tp.empty()) {
    trace.open(tp);
    if (!trace) throw ConfigError("cannot write " + tp.string());
  }
  const Metrics m = engine.run(tp.empty() ? nullptr : &trace);
  if (!mp.empty()) {
    std::ofstream out(mp);
    if (!out) throw ConfigError("cannot write " + mp.string());
    out << to_json(m).dump(2) << '\n';
  }
  return m;
}

Metrics replay_input_log(const ScenarioSpec& spec, std::istream& log, std::ostream* trace) {
  std::map<std::uint64_t, std::vector<json>> inputs;
  std::optional<std::uint64_t> end_tick;
  std::string line;
  std::size_t row = 0;
  while (std::getline(log, line)) {
    ++row;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      if (j.contains("end_tick")) {
        end_tick = j.at("end_tick").get<std::uint64_t>();
      } else {
        inputs[j.at("tick").get<std::uint64_t>()].push_back(j.at("msg"));
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("input log: ") + e.what(), row, 0);
    }
  }
  if (!end_tick) throw ParseError("input log: missing end_tick line", row, 0);
  Engine engine(spec);
  while (engine.tick_index() < *end_tick) {
    if (auto it = inputs.find(engine.tick_index()); it != inputs.end()) {
      for (const json& msg : it->second) engine.push_input(msg);
    }
    const TickRecord rec = engine.step();
    if (trace) *trace << serialize_tick(rec) << '\n';
  }
  return engine.metrics();
}

}  // namespace swarm
