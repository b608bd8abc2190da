#pragma once

// Canonical scenarios shared by the CLI bench command and the acceptance
// checks.

#include <vector>

#include "swarm/scenario.hpp"

namespace swarm {

/// Reaching task toward the target on the right (or left) side. The hand
/// starts in the paper sign, or the sign itself for rock and scissors.
ScenarioSpec reaching_scenario(SignName sign, bool right, Algorithm algorithm,
                               RobotSize size = RobotSize::Mm30,
                               Density density = Density::Sparse);

/// A stationary hand turning from paper to reversed paper.
ScenarioSpec flip_scenario(Algorithm algorithm);

/// Rock hand sliding from the start area toward the target and holding.
ScenarioSpec rock_sweep_scenario(Density density, RobotSize size = RobotSize::Mm30);

/// Two robots swapping places along the x axis, `gap` mm apart.
ScenarioSpec head_on_scenario(double gap = 200.0);

/// n robots on a circle driving to antipodal points.
ScenarioSpec circle_scenario(std::size_t n = 8, double radius = 200.0);

}  // namespace swarm
