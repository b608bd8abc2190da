#include "swarm/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "swarm/errors.hpp"

namespace swarm {

CostMatrix::CostMatrix(std::size_t n, std::vector<double> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n_ * n_) {
    throw ValidationError("cost matrix: " + std::to_string(entries_.size()) +
                          " entries for n = " + std::to_string(n_));
  }
  for (const double e : entries_) {
    if (!std::isfinite(e)) throw ValidationError("cost matrix: non-finite entry");
    if (e < 0.0) throw ValidationError("cost matrix: negative entry");
  }
}

CostMatrix CostMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<double> entries;
  entries.reserve(n * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw ValidationError("cost matrix: not square");
    entries.insert(entries.end(), r.begin(), r.end());
  }
  return CostMatrix(n, std::move(entries));
}

CostMatrix CostMatrix::from_positions(std::span<const Vec2> robots,
                                      std::span<const Vec2> subgoals, CostMetric metric) {
  if (robots.size() != subgoals.size()) {
    throw ValidationError("cost matrix: " + std::to_string(robots.size()) + " robots vs " +
                          std::to_string(subgoals.size()) + " subgoals");
  }
  const std::size_t n = robots.size();
  std::vector<double> entries(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = distance_sq(robots[i], subgoals[j]);
      entries[i * n + j] = metric == CostMetric::Squared ? d2 : std::sqrt(d2);
    }
  }
  return CostMatrix(n, std::move(entries));
}

double CostMatrix::cost_of(std::span<const std::size_t> perm) const {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += (*this)(i, perm[i]);
  return total;
}

std::string_view assignment_mode_name(AssignmentMode m) {
  return m == AssignmentMode::Static ? "static" : "dynamic";
}

bool is_bijection(std::span<const std::size_t> perm) {
  std::vector<bool> seen(perm.size(), false);
  for (const std::size_t p : perm) {
    if (p >= perm.size() || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

Assignment solve_lsap(const CostMatrix& cost) {
  const std::size_t n = cost.size();
  Assignment out;
  out.mode = AssignmentMode::Dynamic;
  if (n == 0) return out;

  // Shortest augmenting path Hungarian method with row potentials u and
  // column potentials v (1-based, column 0 is the virtual root).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_mate(n), col_mate(n);
  for (std::size_t j = 1; j <= n; ++j) {
    row_mate[owner[j] - 1] = j - 1;
    col_mate[j - 1] = owner[j] - 1;
  }

  // Every optimal permutation uses only edges with zero reduced cost under
  // the final potentials, so the lexicographically smallest optimum is the
  // smallest perfect matching of that tight subgraph.
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, cost(i, j));
  }
  const double tol = 1e-12 * scale * static_cast<double>(n);
  std::vector<char> tight(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      tight[i * n + j] = cost(i, j) - u[i + 1] - v[j + 1] <= tol;
    }
    tight[i * n + row_mate[i]] = 1;
  }

  std::vector<char> visited(n);
  // Re-route rows > fixed so that column `target` becomes free, starting from
  // row r. Returns true and rewires mates along the path on success.
  std::function<bool(std::size_t, std::size_t, std::size_t)> reroute =
      [&](std::size_t r, std::size_t target, std::size_t fixed) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (!tight[r * n + c] || visited[c]) continue;
      const std::size_t holder = col_mate[c];
      // rows <= fixed keep their columns; the target is held by row `fixed`
      if (c != target && holder <= fixed) continue;
      visited[c] = 1;
      if (c == target || reroute(holder, target, fixed)) {
        row_mate[r] = c;
        col_mate[c] = r;
        return true;
      }
    }
    return false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!tight[i * n + j]) continue;
      if (row_mate[i] == j) break;
      const std::size_t r = col_mate[j];
      if (r < i) continue;
      const std::size_t freed = row_mate[i];
      std::fill(visited.begin(), visited.end(), 0);
      visited[j] = 1;
      const bool ok = reroute(r, freed, i);
      if (ok) {
        row_mate[i] = j;
        col_mate[j] = i;
        break;
      }
    }
  }

  out.perm = std::move(row_mate);
  out.total_cost = cost.cost_of(out.perm);
  return out;
}

Assignment assign_static(const Assignment& initial, const CostMatrix& current,
                         Generator generator) {
  if (generator == Generator::Silhouette) {
    throw ModeError("static assignment is undefined for silhouette formations");
  }
  if (initial.perm.size() != current.size()) {
    throw ValidationError("assign_static: binding size " + std::to_string(initial.perm.size()) +
                          " != " + std::to_string(current.size()));
  }
  Assignment a;
  a.perm = initial.perm;
  a.mode = AssignmentMode::Static;
  a.total_cost = current.cost_of(a.perm);
  return a;
}

Assignment assign_dynamic(std::span<const Vec2> robots, const SubgoalFormation& formation,
                          CostMetric metric) {
  Assignment a = solve_lsap(CostMatrix::from_positions(robots, formation.points, metric));
  a.mode = AssignmentMode::Dynamic;
  return a;
}

}  // namespace swarm
