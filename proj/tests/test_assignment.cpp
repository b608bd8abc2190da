#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "swarm/assignment.hpp"
#include "swarm/errors.hpp"

using namespace swarm;

namespace {

CostMatrix random_matrix(std::size_t n, std::mt19937_64& rng, bool integer) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> k(0, 9);
  std::vector<double> e(n * n);
  for (double& v : e) v = integer ? k(rng) : u(rng);
  return CostMatrix(n, std::move(e));
}

// Lexicographically first permutation of minimum cost.
std::vector<std::size_t> brute_force(const CostMatrix& c) {
  std::vector<std::size_t> p(c.size());
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::size_t> best = p;
  double best_cost = c.cost_of(p);
  while (std::next_permutation(p.begin(), p.end())) {
    const double cost = c.cost_of(p);
    if (cost < best_cost) {
      best_cost = cost;
      best = p;
    }
  }
  return best;
}

}  // namespace

TEST(Lsap, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 7; ++n) {
    for (int trial = 0; trial < 60; ++trial) {
      const CostMatrix c = random_matrix(n, rng, false);
      const Assignment a = solve_lsap(c);
      const auto ref = brute_force(c);
      EXPECT_EQ(a.total_cost, c.cost_of(ref)) << "n=" << n;
      EXPECT_TRUE(is_bijection(a.perm));
    }
  }
}

TEST(Lsap, TiesResolveToLexicographicallySmallest) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 80; ++trial) {
      const CostMatrix c = random_matrix(n, rng, true);
      EXPECT_EQ(solve_lsap(c).perm, brute_force(c)) << "n=" << n;
    }
  }
}

TEST(Lsap, KnownInstance) {
  const CostMatrix c = CostMatrix::from_rows(
      {{82, 83, 69, 92}, {77, 37, 49, 92}, {11, 69, 5, 86}, {8, 9, 98, 23}});
  const Assignment a = solve_lsap(c);
  EXPECT_EQ(a.total_cost, 140.0);
  EXPECT_EQ(a.perm, (std::vector<std::size_t>{2, 1, 0, 3}));
}

TEST(Lsap, EmptyMatrix) {
  const Assignment a = solve_lsap(CostMatrix(0, {}));
  EXPECT_TRUE(a.perm.empty());
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(CostMatrix, RejectsBadInput) {
  EXPECT_THROW(CostMatrix(2, {1, 2, 3}), ValidationError);
  EXPECT_THROW(CostMatrix(1, {-1}), ValidationError);
  EXPECT_THROW(CostMatrix(1, {std::nan("")}), ValidationError);
  EXPECT_THROW(CostMatrix::from_rows({{1, 2}, {3}}), ValidationError);
  const std::vector<Vec2> a{{0, 0}};
  const std::vector<Vec2> b{{0, 0}, {1, 1}};
  EXPECT_THROW(CostMatrix::from_positions(a, b), ValidationError);
}

TEST(CostMatrix, Metrics) {
  const std::vector<Vec2> r{{0, 0}};
  const std::vector<Vec2> g{{3, 4}};
  EXPECT_EQ(CostMatrix::from_positions(r, g, CostMetric::Squared)(0, 0), 25.0);
  EXPECT_EQ(CostMatrix::from_positions(r, g, CostMetric::Euclidean)(0, 0), 5.0);
}

TEST(Assignment, StaticKeepsBindingAndCostsIt) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const CostMatrix first = random_matrix(5, rng, false);
    const CostMatrix now = random_matrix(5, rng, false);
    const Assignment init = solve_lsap(first);
    const Assignment s = assign_static(init, now, Generator::Bone);
    EXPECT_EQ(s.perm, init.perm);
    EXPECT_EQ(s.total_cost, now.cost_of(init.perm));
    EXPECT_GE(s.total_cost, solve_lsap(now).total_cost);
  }
}

TEST(Assignment, StaticRejectsSilhouette) {
  const CostMatrix c = CostMatrix::from_rows({{1}});
  EXPECT_THROW(assign_static(solve_lsap(c), c, Generator::Silhouette), ModeError);
}

TEST(Assignment, MirroredFrameFavoursDynamic) {
  // six robots bound to a formation that is then mirrored about x = 0
  std::vector<Vec2> goals{{-60, 0}, {-40, 30}, {-20, 60}, {20, 60}, {40, 30}, {60, 0}};
  std::vector<Vec2> robots = goals;
  std::vector<Vec2> mirrored;
  for (const Vec2& g : goals) mirrored.push_back({-g.x, g.y});
  // anchor i moves to its mirror image
  const Assignment init = solve_lsap(CostMatrix::from_positions(robots, goals));
  const CostMatrix now = CostMatrix::from_positions(robots, mirrored);
  const Assignment s = assign_static(init, now, Generator::Bone);
  SubgoalFormation f;
  f.points = mirrored;
  const Assignment d = assign_dynamic(robots, f);
  EXPECT_LT(d.total_cost, s.total_cost);
  EXPECT_EQ(d.total_cost, 0.0);
}

TEST(Assignment, Bijection) {
  EXPECT_TRUE(is_bijection(std::vector<std::size_t>{2, 0, 1}));
  EXPECT_FALSE(is_bijection(std::vector<std::size_t>{0, 0, 1}));
  EXPECT_FALSE(is_bijection(std::vector<std::size_t>{0, 3, 1}));
  EXPECT_TRUE(is_bijection(std::vector<std::size_t>{}));
}
