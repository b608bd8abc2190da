#include "swarm/rvo_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Line {
  Vec2 point;
  Vec2 direction;
};

struct ObstacleVertex {
  Vec2 point;
  Vec2 unit_dir;
  bool convex = true;
  std::size_t next = 0;
  std::size_t prev = 0;
};

double sqr(double x) { return x * x; }

double dist_sq_point_segment(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double r = dot(c - a, b - a) / norm_sq(b - a);
  if (r < 0.0) return norm_sq(c - a);
  if (r > 1.0) return norm_sq(c - b);
  return norm_sq(c - (a + r * (b - a)));
}

bool linear_program1(const std::vector<Line>& lines, std::size_t line_no, double radius,
                     const Vec2& opt, bool direction_opt, Vec2& result) {
  const Line& ln = lines[line_no];
  const double dp = dot(ln.point, ln.direction);
  const double disc = sqr(dp) + sqr(radius) - norm_sq(ln.point);
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t_left = -dp - sq;
  double t_right = -dp + sq;
  for (std::size_t i = 0; i < line_no; ++i) {
    const double denom = cross(ln.direction, lines[i].direction);
    const double numer = cross(lines[i].direction, ln.point - lines[i].point);
    if (std::abs(denom) <= kEps) {
      if (numer < 0.0) return false;
      continue;
    }
    const double t = numer / denom;
    if (denom >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }
  if (direction_opt) {
    result = dot(opt, ln.direction) > 0.0 ? ln.point + t_right * ln.direction
                                          : ln.point + t_left * ln.direction;
  } else {
    const double t = dot(ln.direction, opt - ln.point);
    if (t < t_left) {
      result = ln.point + t_left * ln.direction;
    } else if (t > t_right) {
      result = ln.point + t_right * ln.direction;
    } else {
      result = ln.point + t * ln.direction;
    }
  }
  return true;
}

std::size_t linear_program2(const std::vector<Line>& lines, double radius, const Vec2& opt,
                            bool direction_opt, Vec2& result) {
  if (direction_opt) {
    result = opt * radius;
  } else if (norm_sq(opt) > sqr(radius)) {
    result = normalized(opt) * radius;
  } else {
    result = opt;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 temp = result;
      if (!linear_program1(lines, i, radius, opt, direction_opt, result)) {
        result = temp;
        return i;
      }
    }
  }
  return lines.size();
}

void linear_program3(const std::vector<Line>& lines, std::size_t num_fixed, std::size_t begin,
                     double radius, Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) <= distance) continue;
    std::vector<Line> proj(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(num_fixed));
    for (std::size_t j = num_fixed; j < i; ++j) {
      Line line;
      const double det = cross(lines[i].direction, lines[j].direction);
      if (std::abs(det) <= kEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point +
                     (cross(lines[j].direction, lines[i].point - lines[j].point) / det) *
                         lines[i].direction;
      }
      line.direction = normalized(lines[j].direction - lines[i].direction);
      proj.push_back(line);
    }
    const Vec2 temp = result;
    if (linear_program2(proj, radius, perp(lines[i].direction), true, result) < proj.size()) {
      result = temp;
    }
    distance = cross(lines[i].direction, lines[i].point - result);
  }
}

std::vector<ObstacleVertex> build_vertices(std::span<const Obstacle> obstacles) {
  std::vector<ObstacleVertex> verts;
  for (const Obstacle& ob : obstacles) {
    const std::size_t base = verts.size();
    const std::size_t m = ob.polygon.size();
    for (std::size_t i = 0; i < m; ++i) {
      ObstacleVertex v;
      v.point = ob.polygon[i];
      const Vec2& next = ob.polygon[(i + 1) % m];
      const Vec2& prev = ob.polygon[(i + m - 1) % m];
      v.unit_dir = normalized(next - v.point);
      v.convex = cross(v.point - prev, next - v.point) >= 0.0;
      v.next = base + (i + 1) % m;
      v.prev = base + (i + m - 1) % m;
      verts.push_back(v);
    }
  }
  return verts;
}

void add_obstacle_lines(const AgentInput& self, const std::vector<ObstacleVertex>& verts,
                        const PlannerConfig& cfg, std::vector<Line>& lines) {
  const double range_sq = sqr(cfg.time_horizon_obstacles * cfg.max_speed + self.radius);
  struct Near {
    double dist_sq;
    std::size_t index;
  };
  std::vector<Near> near;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Vec2& a = verts[i].point;
    const Vec2& b = verts[verts[i].next].point;
    const double left = cross(b - a, self.position - a);
    if (left >= 0.0) continue;  // agent on the inner side of this edge
    const double d2 = dist_sq_point_segment(a, b, self.position);
    if (d2 < range_sq) near.push_back({d2, i});
  }
  std::stable_sort(near.begin(), near.end(),
                   [](const Near& a, const Near& b) { return a.dist_sq < b.dist_sq; });

  const double inv_tau = 1.0 / cfg.time_horizon_obstacles;
  const double r = self.radius;
  const double r_sq = sqr(r);
  for (const Near& n : near) {
    const ObstacleVertex* ob1 = &verts[n.index];
    const ObstacleVertex* ob2 = &verts[ob1->next];
    const Vec2 rel1 = ob1->point - self.position;
    const Vec2 rel2 = ob2->point - self.position;

    bool covered = false;
    for (const Line& l : lines) {
      if (cross(inv_tau * rel1 - l.point, l.direction) - inv_tau * r >= -kEps &&
          cross(inv_tau * rel2 - l.point, l.direction) - inv_tau * r >= -kEps) {
        covered = true;
        break;
      }
    }
    if (covered) continue;

    const double d1 = norm_sq(rel1);
    const double d2 = norm_sq(rel2);
    const Vec2 ov = ob2->point - ob1->point;
    const double s = dot(-rel1, ov) / norm_sq(ov);
    const double dline = norm_sq(-rel1 - s * ov);

    Line line;
    if (s < 0.0 && d1 <= r_sq) {
      if (ob1->convex) {
        line.point = {};
        line.direction = normalized(perp(rel1));
        lines.push_back(line);
      }
      continue;
    }
    if (s > 1.0 && d2 <= r_sq) {
      if (ob2->convex && cross(rel2, ob2->unit_dir) >= 0.0) {
        line.point = {};
        line.direction = normalized(perp(rel2));
        lines.push_back(line);
      }
      continue;
    }
    if (s >= 0.0 && s < 1.0 && dline <= r_sq) {
      line.point = {};
      line.direction = -ob1->unit_dir;
      lines.push_back(line);
      continue;
    }

    Vec2 left_leg;
    Vec2 right_leg;
    if (s < 0.0 && dline <= r_sq) {
      if (!ob1->convex) continue;
      ob2 = ob1;
      const double leg = std::sqrt(d1 - r_sq);
      left_leg = Vec2(rel1.x * leg - rel1.y * r, rel1.x * r + rel1.y * leg) / d1;
      right_leg = Vec2(rel1.x * leg + rel1.y * r, -rel1.x * r + rel1.y * leg) / d1;
    } else if (s > 1.0 && dline <= r_sq) {
      if (!ob2->convex) continue;
      ob1 = ob2;
      const double leg = std::sqrt(d2 - r_sq);
      left_leg = Vec2(rel2.x * leg - rel2.y * r, rel2.x * r + rel2.y * leg) / d2;
      right_leg = Vec2(rel2.x * leg + rel2.y * r, -rel2.x * r + rel2.y * leg) / d2;
    } else {
      if (ob1->convex) {
        const double leg = std::sqrt(d1 - r_sq);
        left_leg = Vec2(rel1.x * leg - rel1.y * r, rel1.x * r + rel1.y * leg) / d1;
      } else {
        left_leg = -ob1->unit_dir;
      }
      if (ob2->convex) {
        const double leg = std::sqrt(d2 - r_sq);
        right_leg = Vec2(rel2.x * leg + rel2.y * r, -rel2.x * r + rel2.y * leg) / d2;
      } else {
        right_leg = ob1->unit_dir;
      }
    }

    const ObstacleVertex& left_neighbor = verts[ob1->prev];
    bool left_foreign = false;
    bool right_foreign = false;
    if (ob1->convex && cross(left_leg, -left_neighbor.unit_dir) >= 0.0) {
      left_leg = -left_neighbor.unit_dir;
      left_foreign = true;
    }
    if (ob2->convex && cross(right_leg, ob2->unit_dir) <= 0.0) {
      right_leg = ob2->unit_dir;
      right_foreign = true;
    }

    const Vec2 left_cut = inv_tau * (ob1->point - self.position);
    const Vec2 right_cut = inv_tau * (ob2->point - self.position);
    const Vec2 cut_vec = right_cut - left_cut;
    const bool same = ob1 == ob2;
    const double t = same ? 0.5 : dot(self.velocity - left_cut, cut_vec) / norm_sq(cut_vec);
    const double t_left = dot(self.velocity - left_cut, left_leg);
    const double t_right = dot(self.velocity - right_cut, right_leg);

    if ((t < 0.0 && t_left < 0.0) || (same && t_left < 0.0 && t_right < 0.0)) {
      const Vec2 w = normalized(self.velocity - left_cut);
      line.direction = Vec2(w.y, -w.x);
      line.point = left_cut + r * inv_tau * w;
      lines.push_back(line);
      continue;
    }
    if (t > 1.0 && t_right < 0.0) {
      const Vec2 w = normalized(self.velocity - right_cut);
      line.direction = Vec2(w.y, -w.x);
      line.point = right_cut + r * inv_tau * w;
      lines.push_back(line);
      continue;
    }

    const double dcut = (t < 0.0 || t > 1.0 || same)
                            ? kInf
                            : norm_sq(self.velocity - (left_cut + t * cut_vec));
    const double dleft = t_left < 0.0 ? kInf : norm_sq(self.velocity - (left_cut + t_left * left_leg));
    const double dright =
        t_right < 0.0 ? kInf : norm_sq(self.velocity - (right_cut + t_right * right_leg));

    if (dcut <= dleft && dcut <= dright) {
      line.direction = -ob1->unit_dir;
      line.point = left_cut + r * inv_tau * perp(line.direction);
      lines.push_back(line);
    } else if (dleft <= dright) {
      if (left_foreign) continue;
      line.direction = left_leg;
      line.point = left_cut + r * inv_tau * perp(line.direction);
      lines.push_back(line);
    } else {
      if (right_foreign) continue;
      line.direction = -right_leg;
      line.point = right_cut + r * inv_tau * perp(line.direction);
      lines.push_back(line);
    }
  }
}

void add_drive_lines(const DiffDriveLimits& lim, double offset, std::vector<Line>& lines) {
  // Body frame: vx = (vl + vr) / 2, vy = offset * (vr - vl) / b, so
  // |vx| + b / (2 offset) |vy| <= max_wheel_speed.
  const double vx = lim.max_wheel_speed;
  const double vy = lim.max_wheel_speed * 2.0 * offset / lim.wheel_base;
  const Vec2 corners[4] = {{vx, 0.0}, {0.0, vy}, {-vx, 0.0}, {0.0, -vy}};
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = rotate(corners[i], lim.heading);
    const Vec2 b = rotate(corners[(i + 1) % 4], lim.heading);
    lines.push_back({a, normalized(b - a)});
  }
}

bool neighbor_before(const AgentInput& self, const AgentInput& a, const AgentInput& b) {
  const double da = distance_sq(a.position, self.position);
  const double db = distance_sq(b.position, self.position);
  if (da != db) return da < db;
  if (a.position.x != b.position.x) return a.position.x < b.position.x;
  if (a.position.y != b.position.y) return a.position.y < b.position.y;
  if (a.velocity.x != b.velocity.x) return a.velocity.x < b.velocity.x;
  if (a.velocity.y != b.velocity.y) return a.velocity.y < b.velocity.y;
  return a.radius < b.radius;
}

Vec2 solve(const AgentInput& self, std::span<const AgentInput* const> neighbors,
           const std::vector<ObstacleVertex>& verts, const PlannerConfig& cfg) {
  std::vector<Line> lines;
  if (self.drive) add_drive_lines(*self.drive, cfg.effective_center_offset, lines);
  add_obstacle_lines(self, verts, cfg, lines);
  const std::size_t num_fixed = lines.size();

  const double inv_tau = 1.0 / cfg.time_horizon;
  for (const AgentInput* other : neighbors) {
    const Vec2 rel_pos = other->position - self.position;
    const Vec2 rel_vel = self.velocity - other->velocity;
    const double dist_sq = norm_sq(rel_pos);
    const double comb_r = self.radius + other->radius;
    const double comb_r_sq = sqr(comb_r);
    Line line;
    Vec2 u;
    if (dist_sq > comb_r_sq) {
      const Vec2 w = rel_vel - inv_tau * rel_pos;
      const double w_len_sq = norm_sq(w);
      const double dp1 = dot(w, rel_pos);
      if (dp1 < 0.0 && sqr(dp1) > comb_r_sq * w_len_sq) {
        const double w_len = std::sqrt(w_len_sq);
        const Vec2 unit_w = w / w_len;
        line.direction = Vec2(unit_w.y, -unit_w.x);
        u = (comb_r * inv_tau - w_len) * unit_w;
      } else {
        const double leg = std::sqrt(dist_sq - comb_r_sq);
        if (cross(rel_pos, w) > 0.0) {
          line.direction = Vec2(rel_pos.x * leg - rel_pos.y * comb_r,
                                rel_pos.x * comb_r + rel_pos.y * leg) /
                           dist_sq;
        } else {
          line.direction = -Vec2(rel_pos.x * leg + rel_pos.y * comb_r,
                                 -rel_pos.x * comb_r + rel_pos.y * leg) /
                           dist_sq;
        }
        u = dot(rel_vel, line.direction) * line.direction - rel_vel;
      }
    } else {
      const double inv_dt = 1.0 / cfg.dt;
      Vec2 w = rel_vel - inv_dt * rel_pos;
      double w_len = norm(w);
      if (w_len <= kEps) {
        // coincident centres with equal velocity: separate along a fixed axis
        w = Vec2(rel_pos.x == 0.0 && rel_pos.y == 0.0 ? -1.0 : -rel_pos.x, -rel_pos.y);
        w_len = norm(w);
      }
      const Vec2 unit_w = w / w_len;
      line.direction = Vec2(unit_w.y, -unit_w.x);
      u = (comb_r * inv_dt - w_len) * unit_w;
    }
    line.point = self.velocity + 0.5 * u;
    lines.push_back(line);
  }

  Vec2 result;
  const std::size_t fail = linear_program2(lines, cfg.max_speed, self.pref_velocity, false, result);
  if (fail < lines.size()) linear_program3(lines, num_fixed, fail, cfg.max_speed, result);
  return result;
}

std::vector<const AgentInput*> select_neighbors(const AgentInput& self,
                                                std::span<const AgentInput> pool,
                                                std::size_t skip, const PlannerConfig& cfg) {
  std::vector<const AgentInput*> out;
  const double range_sq = sqr(cfg.neighbor_dist);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (i == skip) continue;
    if (distance_sq(pool[i].position, self.position) < range_sq) out.push_back(&pool[i]);
  }
  std::sort(out.begin(), out.end(), [&](const AgentInput* a, const AgentInput* b) {
    return neighbor_before(self, *a, *b);
  });
  if (out.size() > cfg.max_neighbors) out.resize(cfg.max_neighbors);
  return out;
}

}  // namespace

void PlannerConfig::validate(double robot_radius) const {
  if (!(time_horizon > 0.0) || !(time_horizon_obstacles > 0.0) || !(neighbor_dist > 0.0) ||
      !(max_speed > 0.0) || !(effective_center_offset > 0.0) || !(dt > 0.0) ||
      max_neighbors == 0) {
    throw ValidationError("planner config: all parameters must be positive");
  }
  if (effective_center_offset > robot_radius) {
    throw ValidationError("planner config: effective center offset exceeds robot radius");
  }
}

void Obstacle::validate() const {
  if (polygon.size() < 3) throw ValidationError("obstacle: fewer than 3 vertices");
  for (const Vec2& p : polygon) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ValidationError("obstacle: non-finite vertex");
    }
  }
  if (!is_simple_polygon(polygon)) throw ValidationError("obstacle: polygon is not simple");
  if (signed_area(polygon) <= 0.0) throw ValidationError("obstacle: polygon is not counterclockwise");
}

Vec2 compute_velocity(const AgentInput& self, std::span<const AgentInput> neighbors,
                      std::span<const Obstacle> obstacles, const PlannerConfig& cfg) {
  const auto verts = build_vertices(obstacles);
  const auto near = select_neighbors(self, neighbors, neighbors.size(), cfg);
  return solve(self, near, verts, cfg);
}

std::vector<Vec2> step_all(std::span<const AgentInput> agents, std::span<const Obstacle> obstacles,
                           const PlannerConfig& cfg) {
  const auto verts = build_vertices(obstacles);
  std::vector<Vec2> out(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto near = select_neighbors(agents[i], agents, i, cfg);
    out[i] = solve(agents[i], near, verts, cfg);
  }
  return out;
}

Vec2 effective_center(const Pose2& pose, double offset) {
  return pose.position + offset * unit_from_angle(pose.heading);
}

WheelSpeeds wheel_speeds(const Vec2& v_cmd, const Pose2& pose, double offset, double wheel_base) {
  const Vec2 h = unit_from_angle(pose.heading);
  const double v = dot(v_cmd, h);
  const double omega = dot(v_cmd, perp(h)) / offset;
  return {v - 0.5 * omega * wheel_base, v + 0.5 * omega * wheel_base};
}

Pose2 integrate_unicycle(const Pose2& pose, const WheelSpeeds& w, double wheel_base, double dt) {
  const double v = 0.5 * (w.left + w.right);
  const double omega = (w.right - w.left) / wheel_base;
  const double dth = omega * dt;
  Pose2 out;
  if (std::abs(dth) < 1e-9) {
    const double mid = pose.heading + 0.5 * dth;
    out.position = pose.position + v * dt * unit_from_angle(mid);
  } else {
    const double r = v / omega;
    out.position = pose.position + Vec2(r * (std::sin(pose.heading + dth) - std::sin(pose.heading)),
                                        -r * (std::cos(pose.heading + dth) - std::cos(pose.heading)));
  }
  out.heading = wrap_angle(pose.heading + dth);
  return out;
}

}  // namespace swarm
