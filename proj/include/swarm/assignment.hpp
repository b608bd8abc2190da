#pragma once

// Robot-to-subgoal assignment: an O(n^3) Hungarian solver with a
// lexicographic tie-break, plus the static and dynamic binding modes.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "swarm/formation.hpp"
#include "swarm/geometry.hpp"

namespace swarm {

enum class CostMetric : std::uint8_t { Squared, Euclidean };

/// Square matrix of non-negative finite costs, row-major. Row = robot,
/// column = subgoal.
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Throws ValidationError unless entries.size() == n * n and every entry is
  /// finite and >= 0.
  CostMatrix(std::size_t n, std::vector<double> entries);
  /// Rows given as nested vectors; throws ValidationError when not square.
  static CostMatrix from_rows(const std::vector<std::vector<double>>& rows);
  /// Distances from each robot to each subgoal.
  static CostMatrix from_positions(std::span<const Vec2> robots, std::span<const Vec2> subgoals,
                                   CostMetric metric = CostMetric::Squared);

  std::size_t size() const { return n_; }
  double operator()(std::size_t row, std::size_t col) const { return entries_[row * n_ + col]; }
  /// Sum of cost(i, perm[i]) accumulated in row order.
  double cost_of(std::span<const std::size_t> perm) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

enum class AssignmentMode : std::uint8_t { Static, Dynamic };

std::string_view assignment_mode_name(AssignmentMode m);

struct Assignment {
  std::vector<std::size_t> perm;  // robot index -> subgoal index
  double total_cost = 0.0;
  AssignmentMode mode = AssignmentMode::Dynamic;

  bool operator==(const Assignment&) const = default;
};

/// Minimum-cost perfect matching. Among optimal permutations the
/// lexicographically smallest one is returned.
Assignment solve_lsap(const CostMatrix& cost);

/// Keeps the initial binding and re-evaluates its cost on the current frame.
/// Throws ModeError for silhouette formations, whose subgoal ids do not
/// persist between frames.
Assignment assign_static(const Assignment& initial, const CostMatrix& current,
                         Generator generator);

/// Builds the robot-to-subgoal cost matrix and solves it.
Assignment assign_dynamic(std::span<const Vec2> robots, const SubgoalFormation& formation,
                          CostMetric metric = CostMetric::Squared);

/// True when perm is a permutation of 0..n-1.
bool is_bijection(std::span<const std::size_t> perm);

}  // namespace swarm
