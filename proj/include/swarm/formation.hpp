#pragma once

// Subgoal formation generation: bone-anchored layouts and k-means silhouette
// sampling of the projected skin mesh.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swarm/geometry.hpp"
#include "swarm/hand_model.hpp"

namespace swarm {

enum class RobotSize : int { Mm20 = 20, Mm30 = 30 };
enum class Density : std::uint8_t { Sparse, Medium, Dense };

std::string_view density_name(Density d);
std::optional<Density> parse_density(std::string_view s);
std::optional<RobotSize> robot_size_from_mm(int mm);
/// Disc radius of a robot class, mm.
double robot_radius(RobotSize size);

/// Robots per (size, density): 20 mm -> 6/18/27, 30 mm -> 6/8/12.
std::size_t robot_count(RobotSize size, Density density);

enum class Generator : std::uint8_t {
  Bone,
  Silhouette,
  Fixed,  // explicit points, no hand (planner rollouts)
};

std::string_view generator_name(Generator g);

/// One subgoal: weight_a * bone_a + (1 - weight_a) * bone_b, shifted by an
/// offset expressed in the wrist frame (x along the hand, y toward the index
/// side) and multiplied by the hand scale.
struct Anchor {
  BoneId bone_a = BoneId::WristRoot;
  BoneId bone_b = BoneId::WristRoot;
  double weight_a = 1.0;
  Vec2 offset;

  bool operator==(const Anchor&) const = default;
};

struct AnchorLayout {
  RobotSize size = RobotSize::Mm30;
  Density density = Density::Sparse;
  std::vector<Anchor> anchors;

  /// Throws ValidationError when the anchor count disagrees with robot_count
  /// or a weight falls outside [0, 1].
  void validate() const;

  bool operator==(const AnchorLayout&) const = default;
};

/// Built-in layouts, one per size x density.
const std::vector<AnchorLayout>& default_layouts();
const AnchorLayout& default_layout(RobotSize size, Density density);
/// The built-in layout table in the text format read by parse_layouts.
std::string_view default_layout_table();

/// Rows: `size density anchor_index bone_a bone_b weight_a offset_x offset_y`;
/// `#` starts a comment. Anchors must be listed in index order.
std::vector<AnchorLayout> parse_layouts(std::istream& in);
std::vector<AnchorLayout> load_layouts(const std::filesystem::path& path);
void write_layouts(std::ostream& out, const std::vector<AnchorLayout>& layouts);

/// Layout of the given size whose anchor count equals `count`, if any.
std::optional<AnchorLayout> layout_for_count(std::span<const AnchorLayout> layouts,
                                             RobotSize size, std::size_t count);

struct SubgoalFormation {
  double t = 0.0;
  std::vector<Vec2> points;
  std::vector<std::uint64_t> ids;
  Generator generator = Generator::Bone;
  int hand_id = 0;

  std::size_t size() const { return points.size(); }
};

struct FormationConfig {
  Generator generator = Generator::Bone;
  std::size_t k = 6;
  AnchorLayout layout;
  std::uint64_t kmeans_seed = 0;
  int kmeans_max_iters = 100;

  void validate() const;
};

/// Bone-based formation. Point i is the layout's anchor i; ids are the
/// anchor indices and therefore stable from frame to frame.
SubgoalFormation bone_subgoals(std::span<const Vec2> bones2d, const AnchorLayout& layout,
                               double scale = 1.0);

struct KMeansResult {
  std::vector<std::size_t> labels;
  std::vector<Vec2> centroids;
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm from a seeded farthest-point start. Ties go to the lowest
/// index everywhere, so the result is a pure function of the arguments.
KMeansResult kmeans_cluster(std::span<const Vec2> points, std::size_t k, std::uint64_t seed,
                            int max_iters);

/// Silhouette formation: each subgoal is the mesh vertex nearest a k-means
/// centroid. A vertex already taken by an earlier cluster is skipped in
/// favour of the next nearest one. Ids run from first_id.
SubgoalFormation silhouette_subgoals(std::span<const Vec2> mesh2d, std::size_t k,
                                     const FormationConfig& cfg, std::uint64_t first_id = 0);

/// Runs the configured generator on one hand frame.
SubgoalFormation generate_formation(const HandFrame& frame, const FormationConfig& cfg,
                                    std::uint64_t first_id = 0);

}  // namespace swarm
