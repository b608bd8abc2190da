#include "swarm/formation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

// Fingertips and palm first, then palm spread, PIP joints, MCP joints and
// finally palm/wrist fill. Palm anchors are wrist-frame offsets from the
// wrist root; joints use their bone position directly.
constexpr std::string_view kLayoutTable = R"(# size density anchor_index bone_a bone_b weight_a offset_x offset_y
30 sparse 0 19 19 1 0 0
30 sparse 1 20 20 1 0 0
30 sparse 2 21 21 1 0 0
30 sparse 3 22 22 1 0 0
30 sparse 4 23 23 1 0 0
30 sparse 5 0 9 0.5 0 0
30 medium 0 19 19 1 0 0
30 medium 1 20 20 1 0 0
30 medium 2 21 21 1 0 0
30 medium 3 22 22 1 0 0
30 medium 4 23 23 1 0 0
30 medium 5 0 0 1 58 15
30 medium 6 0 0 1 58 -16
30 medium 7 0 0 1 25 0
30 dense 0 19 19 1 0 0
30 dense 1 20 20 1 0 0
30 dense 2 21 21 1 0 0
30 dense 3 22 22 1 0 0
30 dense 4 23 23 1 0 0
30 dense 5 0 0 1 58 15
30 dense 6 0 0 1 58 -16
30 dense 7 0 0 1 25 0
30 dense 8 7 7 1 0 0
30 dense 9 10 10 1 0 0
30 dense 10 13 13 1 0 0
30 dense 11 17 17 1 0 0
20 sparse 0 19 19 1 0 0
20 sparse 1 20 20 1 0 0
20 sparse 2 21 21 1 0 0
20 sparse 3 22 22 1 0 0
20 sparse 4 23 23 1 0 0
20 sparse 5 0 9 0.5 0 0
20 medium 0 19 19 1 0 0
20 medium 1 20 20 1 0 0
20 medium 2 21 21 1 0 0
20 medium 3 22 22 1 0 0
20 medium 4 23 23 1 0 0
20 medium 5 0 0 1 58 15
20 medium 6 0 0 1 58 -16
20 medium 7 0 0 1 25 0
20 medium 8 5 5 1 0 0
20 medium 9 7 7 1 0 0
20 medium 10 10 10 1 0 0
20 medium 11 13 13 1 0 0
20 medium 12 17 17 1 0 0
20 medium 13 4 4 1 0 0
20 medium 14 6 6 1 0 0
20 medium 15 9 9 1 0 0
20 medium 16 12 12 1 0 0
20 medium 17 16 16 1 0 0
20 dense 0 19 19 1 0 0
20 dense 1 20 20 1 0 0
20 dense 2 21 21 1 0 0
20 dense 3 22 22 1 0 0
20 dense 4 23 23 1 0 0
20 dense 5 8 8 1 0 0
20 dense 6 11 11 1 0 0
20 dense 7 14 14 1 0 0
20 dense 8 18 18 1 0 0
20 dense 9 5 5 1 0 0
20 dense 10 7 7 1 0 0
20 dense 11 10 10 1 0 0
20 dense 12 13 13 1 0 0
20 dense 13 17 17 1 0 0
20 dense 14 4 4 1 0 0
20 dense 15 6 6 1 0 0
20 dense 16 9 9 1 0 0
20 dense 17 12 12 1 0 0
20 dense 18 16 16 1 0 0
20 dense 19 0 0 1 58 -17
20 dense 20 0 0 1 60 1
20 dense 21 0 0 1 60 19
20 dense 22 0 0 1 37 -13
20 dense 23 0 0 1 37 9
20 dense 24 0 0 1 15 -7
20 dense 25 0 0 1 15 15
20 dense 26 0 0 1 -6 0
)";

std::size_t nearest(std::span<const Vec2> centroids, const Vec2& p) {
  std::size_t best = 0;
  double best_d = distance_sq(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = distance_sq(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string_view density_name(Density d) {
  switch (d) {
    case Density::Sparse: return "sparse";
    case Density::Medium: return "medium";
    case Density::Dense: return "dense";
  }
  return "sparse";
}

std::optional<Density> parse_density(std::string_view s) {
  if (s == "sparse") return Density::Sparse;
  if (s == "medium") return Density::Medium;
  if (s == "dense") return Density::Dense;
  return std::nullopt;
}

std::optional<RobotSize> robot_size_from_mm(int mm) {
  if (mm == 20) return RobotSize::Mm20;
  if (mm == 30) return RobotSize::Mm30;
  return std::nullopt;
}

double robot_radius(RobotSize size) { return static_cast<int>(size) / 2.0; }

std::size_t robot_count(RobotSize size, Density density) {
  static constexpr std::size_t kTable[2][3] = {{6, 18, 27}, {6, 8, 12}};
  return kTable[size == RobotSize::Mm20 ? 0 : 1][static_cast<std::size_t>(density)];
}

std::string_view generator_name(Generator g) {
  switch (g) {
    case Generator::Bone: return "bone";
    case Generator::Silhouette: return "silhouette";
    case Generator::Fixed: return "fixed";
  }
  return "bone";
}

void AnchorLayout::validate() const {
  const std::size_t want = robot_count(size, density);
  if (anchors.size() != want) {
    throw ValidationError("anchor layout " + std::to_string(static_cast<int>(size)) + "/" +
                          std::string(density_name(density)) + " has " +
                          std::to_string(anchors.size()) + " anchors, expected " +
                          std::to_string(want));
  }
  for (const Anchor& a : anchors) {
    if (!(a.weight_a >= 0.0 && a.weight_a <= 1.0)) {
      throw ValidationError("anchor weight outside [0, 1]");
    }
  }
}

std::string_view default_layout_table() { return kLayoutTable; }

const std::vector<AnchorLayout>& default_layouts() {
  static const std::vector<AnchorLayout> layouts = [] {
    std::istringstream in{std::string(kLayoutTable)};
    return parse_layouts(in);
  }();
  return layouts;
}

const AnchorLayout& default_layout(RobotSize size, Density density) {
  for (const AnchorLayout& l : default_layouts()) {
    if (l.size == size && l.density == density) return l;
  }
  throw ConfigError("no built-in anchor layout");
}

std::vector<AnchorLayout> parse_layouts(std::istream& in) {
  std::map<std::pair<int, int>, AnchorLayout> by_key;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string size_s;
    if (!(ls >> size_s)) continue;
    std::string density_s;
    std::size_t index = 0;
    int bone_a = 0;
    int bone_b = 0;
    double weight = 0.0;
    double ox = 0.0;
    double oy = 0.0;
    std::size_t field = 1;
    auto need = [&](bool ok) {
      if (!ok) throw ParseError("malformed layout row", row, field);
      ++field;
    };
    need(static_cast<bool>(ls >> density_s));
    need(static_cast<bool>(ls >> index));
    need(static_cast<bool>(ls >> bone_a));
    need(static_cast<bool>(ls >> bone_b));
    need(static_cast<bool>(ls >> weight));
    need(static_cast<bool>(ls >> ox));
    need(static_cast<bool>(ls >> oy));
    std::string extra;
    if (ls >> extra) throw ParseError("trailing field", row, field);

    int size_mm = 0;
    try {
      size_mm = std::stoi(size_s);
    } catch (const std::exception&) {
      throw ParseError("bad size '" + size_s + "'", row, 0);
    }
    const auto size = robot_size_from_mm(size_mm);
    if (!size) throw ParseError("size must be 20 or 30", row, 0);
    const auto density = parse_density(density_s);
    if (!density) throw ParseError("bad density '" + density_s + "'", row, 1);
    for (const auto& [b, f] : {std::pair{bone_a, 3}, std::pair{bone_b, 4}}) {
      if (b < 0 || b >= static_cast<int>(kBoneCount)) {
        throw ParseError("bone id out of range", row, static_cast<std::size_t>(f));
      }
    }
    AnchorLayout& layout = by_key[{size_mm, static_cast<int>(*density)}];
    layout.size = *size;
    layout.density = *density;
    if (index != layout.anchors.size()) throw ParseError("anchor index out of order", row, 2);
    layout.anchors.push_back(Anchor{static_cast<BoneId>(bone_a), static_cast<BoneId>(bone_b),
                                    weight, Vec2{ox, oy}});
  }
  std::vector<AnchorLayout> out;
  for (auto& [key, layout] : by_key) {
    layout.validate();
    out.push_back(std::move(layout));
  }
  return out;
}

std::vector<AnchorLayout> load_layouts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open layout file " + path.string());
  return parse_layouts(in);
}

void write_layouts(std::ostream& out, const std::vector<AnchorLayout>& layouts) {
  out << "# size density anchor_index bone_a bone_b weight_a offset_x offset_y\n";
  for (const AnchorLayout& l : layouts) {
    for (std::size_t i = 0; i < l.anchors.size(); ++i) {
      const Anchor& a = l.anchors[i];
      out << static_cast<int>(l.size) << ' ' << density_name(l.density) << ' ' << i << ' '
          << static_cast<int>(a.bone_a) << ' ' << static_cast<int>(a.bone_b) << ' ' << a.weight_a
          << ' ' << a.offset.x << ' ' << a.offset.y << '\n';
    }
  }
}

std::optional<AnchorLayout> layout_for_count(std::span<const AnchorLayout> layouts,
                                             RobotSize size, std::size_t count) {
  for (const AnchorLayout& l : layouts) {
    if (l.size == size && l.anchors.size() == count) return l;
  }
  return std::nullopt;
}

void FormationConfig::validate() const {
  if (k < 1) throw ValidationError("formation: k must be >= 1");
  if (kmeans_max_iters < 1) throw ValidationError("formation: kmeans_max_iters must be >= 1");
  if (generator == Generator::Bone && layout.anchors.size() != k) {
    throw ValidationError("formation: layout has " + std::to_string(layout.anchors.size()) +
                          " anchors but k = " + std::to_string(k));
  }
}

SubgoalFormation bone_subgoals(std::span<const Vec2> bones2d, const AnchorLayout& layout,
                               double scale) {
  if (bones2d.size() != kBoneCount) {
    throw ValidationError("bone_subgoals: expected " + std::to_string(kBoneCount) + " bones");
  }
  const Vec2 wrist = bones2d[index_of(BoneId::WristRoot)];
  const Vec2 axis = normalized(wrist - bones2d[index_of(BoneId::ForearmStub)]);
  Vec2 side = perp(axis);
  if (cross(axis, bones2d[index_of(BoneId::Index1)] - wrist) < 0.0) side = -side;

  SubgoalFormation f;
  f.generator = Generator::Bone;
  f.points.reserve(layout.anchors.size());
  for (std::size_t i = 0; i < layout.anchors.size(); ++i) {
    const Anchor& a = layout.anchors[i];
    const Vec2 base = bones2d[index_of(a.bone_a)] * a.weight_a +
                      bones2d[index_of(a.bone_b)] * (1.0 - a.weight_a);
    f.points.push_back(base + (axis * a.offset.x + side * a.offset.y) * scale);
    f.ids.push_back(i);
  }
  return f;
}

KMeansResult kmeans_cluster(std::span<const Vec2> points, std::size_t k, std::uint64_t seed,
                            int max_iters) {
  const std::size_t n = points.size();
  if (k < 1) throw ValidationError("kmeans: k must be >= 1");
  if (n < k) {
    throw ValidationError("kmeans: " + std::to_string(n) + " points < k = " + std::to_string(k));
  }
  if (max_iters < 1) throw ValidationError("kmeans: max_iters must be >= 1");

  // seeded farthest-point initialization
  std::mt19937_64 rng(seed);
  std::vector<Vec2> centroids;
  centroids.reserve(k);
  std::vector<bool> chosen(n, false);
  const std::size_t first = static_cast<std::size_t>(rng() % n);
  centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = distance_sq(points[i], points[first]);
  while (centroids.size() < k) {
    std::size_t pick = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i] && d2[i] > best) {
        best = d2[i];
        pick = i;
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], distance_sq(points[i], points[pick]));
    }
  }

  KMeansResult r;
  std::vector<std::size_t> labels(n, 0);
  std::vector<Vec2> sums(k);
  std::vector<std::size_t> counts(k);
  for (int iter = 0; iter < max_iters; ++iter) {
    r.iterations = iter + 1;
    bool changed = iter == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(centroids, points[i]);
      if (c != labels[i]) changed = true;
      labels[i] = c;
    }
    if (!changed) {
      r.converged = true;
      break;
    }
    std::fill(sums.begin(), sums.end(), Vec2{});
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[labels[i]] += points[i];
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids[c] = sums[c] / static_cast<double>(counts[c]);
        continue;
      }
      // empty cluster: restart it on the worst-fit point of a shared cluster
      std::size_t pick = n;
      double worst = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] < 2) continue;
        const double d = distance_sq(points[i], centroids[labels[i]]);
        if (d > worst) {
          worst = d;
          pick = i;
        }
      }
      if (pick == n) continue;
      --counts[labels[pick]];
      sums[labels[pick]] -= points[pick];
      if (counts[labels[pick]] > 0) {
        centroids[labels[pick]] = sums[labels[pick]] / static_cast<double>(counts[labels[pick]]);
      }
      labels[pick] = c;
      counts[c] = 1;
      sums[c] = points[pick];
      centroids[c] = points[pick];
    }
  }
  r.labels = std::move(labels);
  r.centroids = std::move(centroids);
  return r;
}

SubgoalFormation silhouette_subgoals(std::span<const Vec2> mesh2d, std::size_t k,
                                     const FormationConfig& cfg, std::uint64_t first_id) {
  const KMeansResult km = kmeans_cluster(mesh2d, k, cfg.kmeans_seed, cfg.kmeans_max_iters);
  SubgoalFormation f;
  f.generator = Generator::Silhouette;
  std::vector<std::size_t> order(mesh2d.size());
  for (std::size_t c = 0; c < k; ++c) {
    const Vec2 centroid = km.centroids[c];
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return distance_sq(mesh2d[a], centroid) < distance_sq(mesh2d[b], centroid);
    });
    bool placed = false;
    for (const std::size_t i : order) {
      const Vec2 v = mesh2d[i];
      if (std::find(f.points.begin(), f.points.end(), v) != f.points.end()) continue;
      f.points.push_back(v);
      f.ids.push_back(first_id + c);
      placed = true;
      break;
    }
    if (!placed) throw ValidationError("silhouette: fewer distinct vertices than k");
  }
  return f;
}

SubgoalFormation generate_formation(const HandFrame& frame, const FormationConfig& cfg,
                                    std::uint64_t first_id) {
  cfg.validate();
  const PlanarHand planar = project_to_plane(frame);
  SubgoalFormation f;
  switch (cfg.generator) {
    case Generator::Bone:
      f = bone_subgoals(planar.bones, cfg.layout, frame.scale);
      break;
    case Generator::Silhouette:
      frame.validate(true);
      f = silhouette_subgoals(planar.mesh, cfg.k, cfg, first_id);
      break;
    case Generator::Fixed:
      throw ModeError("generate_formation: fixed formations have no hand");
  }
  f.t = frame.t;
  f.hand_id = frame.hand_id;
  return f;
}

}  // namespace swarm
