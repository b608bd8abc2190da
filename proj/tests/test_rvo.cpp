#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swarm/errors.hpp"
#include "swarm/rvo_planner.hpp"

using namespace swarm;

namespace {

struct Lead {
  Pose2 pose;
  Vec2 velocity;
  Vec2 goal;
};

// Planner-only rollout; returns the minimum axle distance seen.
double rollout(std::vector<Lead>& leads, const PlannerConfig& cfg, double radius,
               double wheel_base, int ticks, std::span<const Obstacle> obstacles = {}) {
  const double d = cfg.effective_center_offset;
  double min_sep = 1e9;
  for (int k = 0; k < ticks; ++k) {
    std::vector<AgentInput> in;
    for (const Lead& l : leads) {
      AgentInput a;
      a.position = effective_center(l.pose, d);
      a.velocity = l.velocity;
      a.radius = radius + d;
      Vec2 pref = 10.0 * (l.goal - l.pose.position);
      if (norm(pref) > cfg.max_speed) pref = normalized(pref) * cfg.max_speed;
      a.pref_velocity = pref;
      a.drive = DiffDriveLimits{l.pose.heading, wheel_base, cfg.max_speed};
      in.push_back(a);
    }
    const auto v = step_all(in, obstacles, cfg);
    for (std::size_t i = 0; i < leads.size(); ++i) {
      const WheelSpeeds w = wheel_speeds(v[i], leads[i].pose, d, wheel_base);
      const Pose2 next = integrate_unicycle(leads[i].pose, w, wheel_base, cfg.dt);
      leads[i].velocity = (effective_center(next, d) - in[i].position) / cfg.dt;
      leads[i].pose = next;
    }
    for (std::size_t i = 0; i < leads.size(); ++i) {
      for (std::size_t j = i + 1; j < leads.size(); ++j) {
        min_sep = std::min(min_sep, distance(leads[i].pose.position, leads[j].pose.position));
      }
    }
  }
  return min_sep;
}

}  // namespace

TEST(EffectiveCenter, OffsetAlongHeading) {
  const Vec2 c = effective_center({{1, 2}, kPi / 2}, 7.5);
  EXPECT_NEAR(c.x, 1.0, 1e-12);
  EXPECT_NEAR(c.y, 9.5, 1e-12);
}

TEST(WheelMapping, FiniteDifferenceMatchesCommand) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dt = 1e-5;
  for (int i = 0; i < 500; ++i) {
    const Pose2 p{{100 * u(rng), 100 * u(rng)}, kPi * u(rng)};
    const Vec2 v{200 * u(rng), 200 * u(rng)};
    const double d = 7.5;
    const double b = 24.0;
    const WheelSpeeds w = wheel_speeds(v, p, d, b);
    const Pose2 q = integrate_unicycle(p, w, b, dt);
    const Vec2 fd = (effective_center(q, d) - effective_center(p, d)) / dt;
    // O(dt) velocity error from the O(dt^2) displacement error
    EXPECT_NEAR(fd.x, v.x, 1e-3 * (1 + norm(v)));
    EXPECT_NEAR(fd.y, v.y, 1e-3 * (1 + norm(v)));
  }
}

TEST(Unicycle, StraightAndPivot) {
  const Pose2 p{{0, 0}, 0.0};
  const Pose2 s = integrate_unicycle(p, {100, 100}, 24.0, 0.5);
  EXPECT_NEAR(s.position.x, 50.0, 1e-12);
  EXPECT_NEAR(s.position.y, 0.0, 1e-12);
  const Pose2 r = integrate_unicycle(p, {-12, 12}, 24.0, 1.0);
  EXPECT_NEAR(norm(r.position), 0.0, 1e-12);
  EXPECT_NEAR(r.heading, 1.0, 1e-12);
}

TEST(Rvo, FreeAgentTakesPreferredVelocity) {
  PlannerConfig cfg;
  AgentInput a;
  a.pref_velocity = {100, 50};
  const Vec2 v = compute_velocity(a, {}, {}, cfg);
  EXPECT_NEAR(v.x, 100, 1e-9);
  EXPECT_NEAR(v.y, 50, 1e-9);
}

TEST(Rvo, SpeedCappedAtMax) {
  PlannerConfig cfg;
  AgentInput a;
  a.pref_velocity = {1000, 0};
  EXPECT_NEAR(norm(compute_velocity(a, {}, {}, cfg)), cfg.max_speed, 1e-9);
}

TEST(Rvo, VelocityInsideDriveDiamond) {
  PlannerConfig cfg;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    AgentInput a;
    a.pref_velocity = {400 * u(rng), 400 * u(rng)};
    a.drive = DiffDriveLimits{kPi * u(rng), 24.0, 400.0};
    const Vec2 v = compute_velocity(a, {}, {}, cfg);
    const WheelSpeeds w = wheel_speeds(v, {{0, 0}, a.drive->heading}, cfg.effective_center_offset, 24.0);
    EXPECT_LE(std::abs(w.left), 400.0 + 1e-6);
    EXPECT_LE(std::abs(w.right), 400.0 + 1e-6);
  }
}

TEST(Rvo, HeadOnPairStaysApart) {
  PlannerConfig cfg;
  std::vector<Lead> leads{{{{-100, 0}, 0.0}, {}, {100, 0}}, {{{100, 0}, kPi}, {}, {-100, 0}}};
  EXPECT_GE(rollout(leads, cfg, 15.0, 24.0, 1000), 30.0);
  EXPECT_LT(distance(leads[0].pose.position, leads[0].goal), 5.0);
  EXPECT_LT(distance(leads[1].pose.position, leads[1].goal), 5.0);
}

TEST(Rvo, CircleSwapStaysApart) {
  PlannerConfig cfg;
  std::vector<Lead> leads;
  for (int i = 0; i < 8; ++i) {
    const double a = 2 * kPi * i / 8;
    const Vec2 p = unit_from_angle(a) * 200.0;
    leads.push_back({{p, wrap_angle(a + kPi)}, {}, -p});
  }
  EXPECT_GE(rollout(leads, cfg, 15.0, 24.0, 1000), 30.0);
}

TEST(Rvo, ObstacleBlocksStraightPath) {
  PlannerConfig cfg;
  const std::vector<Obstacle> obstacles{{{{-20, -40}, {20, -40}, {20, 40}, {-20, 40}}}};
  std::vector<Lead> leads{{{{-150, 0}, 0.0}, {}, {150, 0}}};
  const double d = cfg.effective_center_offset;
  for (int k = 0; k < 600; ++k) {
    AgentInput a;
    a.position = effective_center(leads[0].pose, d);
    a.velocity = leads[0].velocity;
    a.radius = 15.0 + d;
    Vec2 pref = 10.0 * (leads[0].goal - leads[0].pose.position);
    if (norm(pref) > cfg.max_speed) pref = normalized(pref) * cfg.max_speed;
    a.pref_velocity = pref;
    a.drive = DiffDriveLimits{leads[0].pose.heading, 24.0, cfg.max_speed};
    const Vec2 v = compute_velocity(a, {}, obstacles, cfg);
    const Pose2 next = integrate_unicycle(leads[0].pose, wheel_speeds(v, leads[0].pose, d, 24.0), 24.0, cfg.dt);
    leads[0].velocity = (effective_center(next, d) - a.position) / cfg.dt;
    leads[0].pose = next;
    EXPECT_FALSE(inside_polygon(leads[0].pose.position, obstacles[0].polygon));
  }
}

TEST(Obstacle, Validation) {
  EXPECT_THROW((Obstacle{{{0, 0}, {1, 0}}}.validate()), ValidationError);
  EXPECT_THROW((Obstacle{{{0, 0}, {0, 1}, {1, 0}}}.validate()), ValidationError);  // clockwise
  EXPECT_THROW((Obstacle{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}.validate()), ValidationError);
  EXPECT_NO_THROW((Obstacle{{{0, 0}, {1, 0}, {0, 1}}}.validate()));
}

TEST(PlannerConfig, Validation) {
  PlannerConfig cfg;
  EXPECT_NO_THROW(cfg.validate(15.0));
  cfg.time_horizon = 0.0;
  EXPECT_THROW(cfg.validate(15.0), ValidationError);
  cfg = PlannerConfig{};
  cfg.dt = -1.0;
  EXPECT_THROW(cfg.validate(15.0), ValidationError);
}
