#include "swarm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

using nlohmann::json;

// Strict object reader: every key must be consumed, so typos surface as
// errors instead of silently falling back to defaults.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return as_number(at(key), key);
  }
  double number(const std::string& key) {
    require(key);
    return as_number(at(key), key);
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key + ": expected a boolean");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail(key + ": expected a string");
    return v.get<std::string>();
  }
  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(key + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  Vec2 vec2(const std::string& key, Vec2 fallback) {
    if (!has(key)) return fallback;
    return as_vec2(at(key), key);
  }
  Section sub(const std::string& key) { return Section(at(key), where_ + "." + key); }

  void require(const std::string& key) const {
    if (!has(key)) fail("missing key '" + key + "'");
  }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(where_ + ": " + what);
  }

  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) fail(key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key + ": not finite");
    return d;
  }
  Vec2 as_vec2(const json& v, const std::string& key) const {
    if (!v.is_array() || v.size() != 2) fail(key + ": expected [x, y]");
    return {as_number(v[0], key), as_number(v[1], key)};
  }
  std::vector<Vec2> points(const json& v, const std::string& key) const {
    if (!v.is_array()) fail(key + ": expected a list of [x, y]");
    std::vector<Vec2> out;
    for (const json& p : v) out.push_back(as_vec2(p, key));
    return out;
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

Rect parse_rect(Section s) {
  s.require("min");
  s.require("max");
  Rect r{s.vec2("min", {}), s.vec2("max", {})};
  s.finish();
  if (!(r.min.x < r.max.x && r.min.y < r.max.y)) s.fail("min must be below max");
  return r;
}

SignName sign_of(Section& s, const std::string& key, SignName fallback) {
  if (!s.has(key)) return fallback;
  const std::string v = s.string(key, "");
  const auto sign = parse_sign(v);
  if (!sign) s.fail(key + ": unknown sign '" + v + "'");
  return *sign;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

CalibrationCurve parse_curve(Section& s, const std::string& key, const CalibrationCurve& fallback) {
  if (!s.has(key)) return fallback;
  const json& v = s.at(key);
  if (!v.is_array()) s.fail(key + ": expected [[v, duty], ...]");
  CalibrationCurve c;
  for (const json& p : v) {
    const Vec2 q = s.as_vec2(p, key);
    c.points.emplace_back(q.x, q.y);
  }
  return c;
}

void parse_robots(Section s, ScenarioSpec& out) {
  RobotsSpec& r = out.robots;
  const auto size_mm = static_cast<int>(s.number("size", 30));
  const auto size = robot_size_from_mm(size_mm);
  if (!size) s.fail("size must be 20 or 30");
  r.size = *size;
  const std::string dens = s.string("density", "sparse");
  const auto d = parse_density(dens);
  if (!d) s.fail("unknown density '" + dens + "'");
  r.density = *d;
  if (s.has("count")) r.count = static_cast<std::size_t>(s.unsigned_int("count", 0));
  const std::string placement = s.string("placement", "formation");
  if (placement == "formation") {
    r.placement = Placement::Formation;
  } else if (placement == "random") {
    r.placement = Placement::Random;
  } else if (placement == "explicit") {
    r.placement = Placement::Explicit;
  } else {
    s.fail("unknown placement '" + placement + "'");
  }
  if (s.has("poses")) {
    const json& v = s.at("poses");
    if (!v.is_array()) s.fail("poses: expected [[x, y, heading], ...]");
    for (const json& p : v) {
      if (!p.is_array() || p.size() != 3) s.fail("poses: expected [x, y, heading]");
      r.poses.push_back({{s.as_number(p[0], "poses"), s.as_number(p[1], "poses")},
                         s.as_number(p[2], "poses")});
    }
  }
  if (s.has("region")) r.region = parse_rect(s.sub("region"));
  r.heading = s.number("heading", r.heading);
  if (s.has("wheel_base")) r.wheel_base = s.number("wheel_base");
  s.finish();
}

void parse_hand_source(Section s, ScenarioSpec& out, const std::filesystem::path& base) {
  HandSourceSpec& h = out.hand_source;
  const std::string type = s.string("type", "none");
  h.rate_hz = s.number("rate_hz", h.rate_hz);
  if (type == "none") {
    h.type = HandSourceType::None;
  } else if (type == "trajectory") {
    h.type = HandSourceType::Trajectory;
    s.require("path");
    h.path = resolve(base, s.string("path", ""));
  } else if (type == "script") {
    h.type = HandSourceType::Script;
    s.require("keyframes");
    const json& ks = s.at("keyframes");
    if (!ks.is_array() || ks.empty()) s.fail("keyframes: expected a non-empty list");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      Section k(ks[i], s.where() + ".keyframes[" + std::to_string(i) + "]");
      HandKeyframe key;
      key.t = k.number("t");
      key.wrist.position = {k.number("x"), k.number("y")};
      key.wrist.yaw = k.number("yaw", kPi / 2.0);
      key.wrist.height = k.number("height", key.wrist.height);
      const SignName sign = sign_of(k, "sign", SignName::Paper);
      const bool palm_up = k.boolean("palm_up", sign == SignName::ReversedPaper);
      try {
        key.sign = hand_sign(sign, palm_up).name;
      } catch (const ValidationError& e) {
        k.fail(e.what());
      }
      key.scale = k.number("scale", 1.0);
      key.hand_id = static_cast<int>(k.unsigned_int("hand_id", 0));
      k.finish();
      h.keyframes.push_back(key);
    }
  } else if (type == "fixed") {
    h.type = HandSourceType::Fixed;
    s.require("points");
    h.points = s.points(s.at("points"), "points");
    const std::string binding = s.string("binding", "optimal");
    if (binding != "optimal" && binding != "identity") {
      s.fail("binding must be 'optimal' or 'identity'");
    }
    h.identity_binding = binding == "identity";
  } else if (type == "reaching") {
    h.type = HandSourceType::Reaching;
    ReachingSpec& r = h.reaching;
    r.sign = sign_of(s, "sign", r.sign);
    r.start_sign = sign_of(s, "start_sign", r.start_sign);
    const std::string side = s.string("side", "right");
    if (side != "left" && side != "right") s.fail("side must be 'left' or 'right'");
    r.right = side == "right";
    r.yaw = s.number("yaw", r.yaw);
    r.scale = s.number("scale", r.scale);
  } else if (type == "live") {
    h.type = HandSourceType::Live;
  } else {
    s.fail("unknown hand source type '" + type + "'");
  }
  s.finish();
}

void parse_task(Section s, ScenarioSpec& out) {
  TaskSpec t;
  if (s.has("start_area")) t.start_area = parse_rect(s.sub("start_area"));
  t.target_offset = s.vec2("target", t.target_offset);
  t.dwell_s = s.number("dwell_s", t.dwell_s);
  t.window_s = s.number("window_s", t.window_s);
  t.fit_tolerance = s.number("fit_tolerance_mm", t.fit_tolerance);
  t.reach_s = s.number("reach_s", t.reach_s);
  t.stop_after_window = s.boolean("stop_after_window", t.stop_after_window);
  s.finish();
  out.task = t;
}

void parse_gains(Section s, ScenarioSpec& out) {
  ControlGains& g = out.gains;
  g.k_l = s.number("K_L", g.k_l);
  g.k_theta = s.number("K_theta", g.k_theta);
  g.k_theta_dot = s.number("K_theta_dot", g.k_theta_dot);
  g.sigma = s.number("sigma", g.sigma);
  g.v_l_min = s.number("V_l_min", g.v_l_min);
  g.v_r_min = s.number("V_r_min", g.v_r_min);
  g.v_l_max = s.number("V_l_max", g.v_l_max);
  g.v_r_max = s.number("V_r_max", g.v_r_max);
  const CalibrationCurve def = CalibrationCurve::identity(g.v_max());
  out.calibration_left = parse_curve(s, "calibration_left", def);
  out.calibration_right = parse_curve(s, "calibration_right", def);
  s.finish();
}

void parse_planner(Section s, ScenarioSpec& out) {
  PlannerConfig& p = out.planner;
  p.time_horizon = s.number("time_horizon", p.time_horizon);
  p.time_horizon_obstacles = s.number("time_horizon_obstacles", p.time_horizon_obstacles);
  p.neighbor_dist = s.number("neighbor_dist", p.neighbor_dist);
  p.max_neighbors = static_cast<std::size_t>(s.unsigned_int("max_neighbors", p.max_neighbors));
  p.max_speed = s.number("max_speed", p.max_speed);
  if (s.has("effective_center_offset")) {
    p.effective_center_offset = s.number("effective_center_offset");
    out.planner_offset_set = true;
  }
  p.dt = s.number("dt", p.dt);
  out.preferred_velocity_gain = s.number("preferred_velocity_gain", out.preferred_velocity_gain);
  out.wheel_limits = s.boolean("wheel_limits", out.wheel_limits);
  s.finish();
}

void parse_formation(Section s, ScenarioSpec& out, const std::filesystem::path& base) {
  if (s.has("kmeans_seed")) out.kmeans_seed = s.unsigned_int("kmeans_seed", 0);
  out.kmeans_max_iters = static_cast<int>(s.unsigned_int("kmeans_max_iters", 100));
  const std::string metric = s.string("cost_metric", "squared");
  if (metric == "squared") {
    out.cost_metric = CostMetric::Squared;
  } else if (metric == "euclidean") {
    out.cost_metric = CostMetric::Euclidean;
  } else {
    s.fail("cost_metric must be 'squared' or 'euclidean'");
  }
  if (s.has("layouts")) out.layouts = load_layouts(resolve(base, s.string("layouts", "")));
  s.finish();
}

void parse_graycode(Section s, ScenarioSpec& out) {
  GraycodeSpec& g = out.graycode;
  g.enabled = s.boolean("enabled", true);
  g.config.bits_per_axis = static_cast<int>(s.unsigned_int("bits_per_axis", 10));
  g.config.cell_size = s.number("cell_size", g.config.cell_size);
  g.config.origin = s.vec2("origin", g.config.origin);
  if (s.has("sensor_offsets")) {
    const auto pts = s.points(s.at("sensor_offsets"), "sensor_offsets");
    if (pts.size() != 2) s.fail("sensor_offsets: expected two points");
    g.config.sensor_offsets = {pts[0], pts[1]};
  }
  s.finish();
}

}  // namespace

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  std::string v(s);
  std::replace(v.begin(), v.end(), '-', '_');
  if (v == "bone_static") return Algorithm::BoneStatic;
  if (v == "bone_dynamic") return Algorithm::BoneDynamic;
  if (v == "silhouette_dynamic") return Algorithm::SilhouetteDynamic;
  return std::nullopt;
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::BoneStatic: return "bone_static";
    case Algorithm::BoneDynamic: return "bone_dynamic";
    case Algorithm::SilhouetteDynamic: return "silhouette_dynamic";
  }
  return "?";
}

Generator generator_of(Algorithm a) {
  return a == Algorithm::SilhouetteDynamic ? Generator::Silhouette : Generator::Bone;
}

AssignmentMode assignment_mode_of(Algorithm a) {
  return a == Algorithm::BoneStatic ? AssignmentMode::Static : AssignmentMode::Dynamic;
}

std::string_view hand_source_name(HandSourceType t) {
  switch (t) {
    case HandSourceType::None: return "none";
    case HandSourceType::Trajectory: return "trajectory";
    case HandSourceType::Script: return "script";
    case HandSourceType::Fixed: return "fixed";
    case HandSourceType::Reaching: return "reaching";
    case HandSourceType::Live: return "live";
  }
  return "?";
}

double RobotsSpec::resolved_wheel_base() const {
  return wheel_base ? *wheel_base : 0.8 * 2.0 * radius();
}

std::size_t ScenarioSpec::robot_count() const {
  if (robots.count) return *robots.count;
  if (hand_source.type == HandSourceType::Fixed) return hand_source.points.size();
  if (robots.placement == Placement::Explicit) return robots.poses.size();
  return swarm::robot_count(robots.size, robots.density);
}

void ScenarioSpec::validate() const {
  gains.validate();
  calibration_left.validate();
  calibration_right.validate();
  const double lo = std::min(gains.v_l_min, gains.v_r_min);
  for (const CalibrationCurve* c : {&calibration_left, &calibration_right}) {
    if (c->points.front().first > lo || c->points.back().first < gains.v_max()) {
      throw ValidationError("calibration table does not cover [V_min, V_max]");
    }
  }
  const double radius = robots.radius();
  PlannerConfig p = planner;
  if (!planner_offset_set) p.effective_center_offset = radius / 2.0;
  p.validate(radius);
  if (!(preferred_velocity_gain > 0.0)) throw ValidationError("preferred_velocity_gain must be positive");
  if (!(robots.resolved_wheel_base() > 0.0)) throw ValidationError("wheel_base must be positive");
  for (const Obstacle& o : obstacles) o.validate();
  if (graycode.enabled) graycode.config.validate();
  if (!(command_period > 0.0)) throw ValidationError("command_period_s must be positive");
  const double ratio = command_period / planner.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
    throw ValidationError("physics dt must divide the command period");
  }
  const double hand_ratio = 1.0 / (hand_source.rate_hz * planner.dt);
  if (std::abs(hand_ratio - std::round(hand_ratio)) > 1e-9 || std::round(hand_ratio) < 1.0) {
    throw ValidationError("physics dt must divide the hand-frame period");
  }
  if (duration_s && !(*duration_s >= 0.0)) throw ValidationError("duration_s must be >= 0");
  if (kmeans_max_iters < 1) throw ValidationError("kmeans_max_iters must be >= 1");

  const std::size_t n = robot_count();
  if (n == 0) throw ValidationError("scenario has no robots");
  if (robots.placement == Placement::Explicit && robots.poses.size() != n) {
    throw ValidationError("explicit placement lists " + std::to_string(robots.poses.size()) +
                          " poses for " + std::to_string(n) + " robots");
  }
  if (hand_source.type == HandSourceType::Fixed) {
    if (hand_source.points.size() != n) {
      throw ValidationError("fixed goals: " + std::to_string(hand_source.points.size()) +
                            " points for " + std::to_string(n) + " robots");
    }
    if (algorithm == Algorithm::SilhouetteDynamic) {
      throw ModeError("silhouette generation needs a hand mesh; fixed goals have none");
    }
  }
  if (hand_source.type == HandSourceType::Reaching && !task) {
    throw ValidationError("reaching hand source needs a task section");
  }
}

ScenarioSpec parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  ScenarioSpec out;
  Section s(j, "scenario");
  out.name = s.string("name", out.name);
  out.seed = s.unsigned_int("seed", 0);
  if (s.has("duration_s")) out.duration_s = s.number("duration_s");
  out.command_period = s.number("command_period_s", out.command_period);
  if (s.has("robots")) parse_robots(s.sub("robots"), out);
  if (s.has("algorithm")) {
    const std::string a = s.string("algorithm", "");
    const auto alg = parse_algorithm(a);
    if (!alg && (a == "silhouette_static" || a == "silhouette-static")) {
      throw ModeError("static assignment is undefined for silhouette formations");
    }
    if (!alg) s.fail("unknown algorithm '" + a + "'");
    out.algorithm = *alg;
  }
  if (s.has("hand_source")) parse_hand_source(s.sub("hand_source"), out, base_dir);
  if (s.has("task")) parse_task(s.sub("task"), out);
  if (s.has("arena")) out.arena = parse_rect(s.sub("arena"));
  if (s.has("obstacles")) {
    const json& obs = s.at("obstacles");
    if (!obs.is_array()) s.fail("obstacles: expected a list of polygons");
    for (const json& poly : obs) out.obstacles.push_back({s.points(poly, "obstacles")});
  }
  if (s.has("gains")) parse_gains(s.sub("gains"), out);
  if (s.has("planner")) parse_planner(s.sub("planner"), out);
  if (s.has("formation")) parse_formation(s.sub("formation"), out, base_dir);
  if (s.has("graycode")) parse_graycode(s.sub("graycode"), out);
  if (s.has("outputs")) {
    Section o = s.sub("outputs");
    out.outputs.trace = resolve(base_dir, o.string("trace", ""));
    out.outputs.metrics = resolve(base_dir, o.string("metrics", ""));
    o.finish();
  }
  s.finish();
  try {
    out.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const ModeError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return out;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

}  // namespace swarm
