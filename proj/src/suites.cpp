#include "swarm/suites.hpp"

#include <cmath>

namespace swarm {

ScenarioSpec reaching_scenario(SignName sign, bool right, Algorithm algorithm, RobotSize size,
                               Density density) {
  ScenarioSpec s;
  s.name = std::string("reaching-") + std::string(sign_name(sign)) + (right ? "-right" : "-left");
  s.robots.size = size;
  s.robots.density = density;
  s.algorithm = algorithm;
  s.hand_source.type = HandSourceType::Reaching;
  s.hand_source.reaching.sign = sign;
  s.hand_source.reaching.start_sign = sign == SignName::ReversedPaper ? SignName::Paper : sign;
  s.hand_source.reaching.right = right;
  s.task = TaskSpec{};
  return s;
}

ScenarioSpec flip_scenario(Algorithm algorithm) {
  ScenarioSpec s;
  s.name = "flip";
  s.algorithm = algorithm;
  s.hand_source.type = HandSourceType::Script;
  WristPose w;
  w.position = {-60.0, 0.0};
  w.yaw = kPi / 2.0;
  s.hand_source.keyframes = {{0.0, w, SignName::Paper},
                             {1.0, w, SignName::Paper},
                             {2.0, w, SignName::ReversedPaper},
                             {8.0, w, SignName::ReversedPaper}};
  return s;
}

ScenarioSpec rock_sweep_scenario(Density density, RobotSize size) {
  ScenarioSpec s;
  s.name = std::string("rock-sweep-") + std::string(density_name(density));
  s.robots.size = size;
  s.robots.density = density;
  s.hand_source.type = HandSourceType::Script;
  WristPose a;
  a.position = {-60.0, -80.0};
  a.yaw = kPi / 2.0;
  WristPose b = a;
  b.position = {113.0, 220.0};
  s.hand_source.keyframes = {{0.0, a, SignName::Rock},
                             {2.0, a, SignName::Rock},
                             {4.0, b, SignName::Rock},
                             {8.0, b, SignName::Rock}};
  return s;
}

ScenarioSpec head_on_scenario(double gap) {
  ScenarioSpec s;
  s.name = "head-on";
  s.robots.count = 2;
  s.robots.placement = Placement::Explicit;
  s.robots.poses = {{{-gap / 2.0, 0.0}, 0.0}, {{gap / 2.0, 0.0}, kPi}};
  s.hand_source.type = HandSourceType::Fixed;
  s.hand_source.points = {{gap / 2.0, 0.0}, {-gap / 2.0, 0.0}};
  s.hand_source.identity_binding = true;
  s.duration_s = 10.0;
  return s;
}

ScenarioSpec circle_scenario(std::size_t n, double radius) {
  ScenarioSpec s;
  s.name = "circle-" + std::to_string(n);
  s.robots.count = n;
  s.robots.placement = Placement::Explicit;
  s.hand_source.type = HandSourceType::Fixed;
  s.hand_source.identity_binding = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const Vec2 p = unit_from_angle(a) * radius;
    s.robots.poses.push_back({p, wrap_angle(a + kPi)});
    s.hand_source.points.push_back(-p);
  }
  s.duration_s = 10.0;
  return s;
}

}  // namespace swarm
