#pragma once

// Hand skeleton and skin-sample representation, the four preset hand signs,
// trajectory interpolation and the line-oriented trajectory file format.
//
// Bone numbering mirrors the hand-tracking runtime the system was built
// around (wrist root first, fingertips last). All lengths are millimetres.
// Segment lengths, finger widths and flexion presets are approximations of
// adult-hand averages; they live in one table in hand_model.cpp.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm {

enum class BoneId : std::uint8_t {
  WristRoot = 0,
  ForearmStub = 1,
  Thumb0 = 2,
  Thumb1 = 3,
  Thumb2 = 4,
  Thumb3 = 5,
  Index1 = 6,
  Index2 = 7,
  Index3 = 8,
  Middle1 = 9,
  Middle2 = 10,
  Middle3 = 11,
  Ring1 = 12,
  Ring2 = 13,
  Ring3 = 14,
  Pinky0 = 15,
  Pinky1 = 16,
  Pinky2 = 17,
  Pinky3 = 18,
  ThumbTip = 19,
  IndexTip = 20,
  MiddleTip = 21,
  RingTip = 22,
  PinkyTip = 23,
};

inline constexpr std::size_t kBoneCount = 24;

constexpr std::size_t index_of(BoneId id) { return static_cast<std::size_t>(id); }
std::string_view bone_name(BoneId id);
std::optional<BoneId> parse_bone(std::string_view name);

/// Fingertip bones in thumb..pinky order.
inline constexpr std::array<BoneId, 5> kFingertips = {
    BoneId::ThumbTip, BoneId::IndexTip, BoneId::MiddleTip, BoneId::RingTip, BoneId::PinkyTip};

enum class SignName : std::uint8_t { Rock, Scissors, Paper, ReversedPaper };

std::string_view sign_name(SignName s);
std::optional<SignName> parse_sign(std::string_view s);

/// Flexion preset of one long finger. Angles in degrees; splay is the
/// in-plane yaw of the finger relative to the hand axis, positive toward the
/// thumb. Flexion angles are cumulative bends toward the palm.
struct FingerFlex {
  double splay_deg = 0.0;
  double mcp_deg = 0.0;
  double pip_deg = 0.0;
  double dip_deg = 0.0;
};

/// Thumb segment directions (metacarpal, proximal, distal): in-plane yaw and
/// downward pitch, degrees.
struct ThumbFlex {
  std::array<double, 3> yaw_deg{};
  std::array<double, 3> pitch_deg{};
};

struct HandSign {
  SignName name = SignName::Paper;
  std::array<FingerFlex, 4> fingers{};  // index, middle, ring, pinky
  ThumbFlex thumb{};
  bool palm_up = false;
};

/// The preset for a named sign. reversed_paper is paper with palm_up set.
HandSign hand_sign(SignName name);

struct WristPose {
  Vec2 position;
  double yaw = 0.0;       // direction the fingers point, rad
  double height = 60.0;   // wrist height above the table, mm
};

struct HandFrame {
  double t = 0.0;
  std::array<Vec3, kBoneCount> bones{};
  std::vector<Vec3> mesh;
  int hand_id = 0;
  double scale = 1.0;

  const Vec3& bone(BoneId id) const { return bones[index_of(id)]; }

  /// Throws ValidationError on non-finite data, scale <= 0, or an empty mesh
  /// when one is required.
  void validate(bool require_mesh = false) const;

  bool operator==(const HandFrame&) const = default;
};

struct HandTrajectory {
  std::vector<HandFrame> frames;
  double rate_hz = 50.0;

  bool empty() const { return frames.empty(); }
  /// Distinct hand ids in ascending order.
  std::vector<int> hand_ids() const;
  /// Frames of one hand in time order.
  std::vector<HandFrame> frames_of(int hand_id) const;
  /// Throws ValidationError unless timestamps are non-decreasing overall,
  /// strictly increasing per hand, and mesh sizes agree per hand.
  void validate() const;

  bool operator==(const HandTrajectory&) const = default;
};

struct PlanarHand {
  std::vector<Vec2> bones;
  std::vector<Vec2> mesh;
};

/// Builds a full skeleton and skin samples for a sign at a wrist pose.
/// Positions are stored unscaled; `scale` is recorded on the frame and
/// applied about the wrist by project_to_plane.
HandFrame synth_hand_sign(const HandSign& sign, const WristPose& wrist, double scale,
                          int hand_id = 0, double t = 0.0);

/// Applies the frame scale about the wrist and drops z. Order is preserved.
PlanarHand project_to_plane(const HandFrame& frame);

/// Per-bone (and per-mesh-vertex) linear interpolation of one hand's frames.
/// Returns the stored frame exactly when t hits a timestamp. Throws
/// RangeError outside the stored time range or for an unknown hand.
HandFrame interpolate_frame(const HandTrajectory& traj, double t, int hand_id = 0);

/// Interpolates between two frames of the same hand; `s` in [0, 1].
HandFrame lerp_frames(const HandFrame& a, const HandFrame& b, double s);

/// Number of skin samples every synthesized frame carries.
std::size_t canonical_mesh_size();

/// Sign preset from a name plus palm orientation. Paper with palm_up is
/// reversed_paper; palm_up with rock or scissors throws ValidationError.
HandSign hand_sign(SignName name, bool palm_up);

/// Hand pose and sign at a point in time. Frames between keyframes blend the
/// wrist pose (yaw along the shorter arc) and, when the signs differ, the
/// bone and mesh positions of both signs at that pose.
struct HandKeyframe {
  double t = 0.0;
  WristPose wrist;
  SignName sign = SignName::Paper;
  double scale = 1.0;
  int hand_id = 0;
};

/// Samples keyframes at rate_hz from the first to the last keyframe of each
/// hand (the last keyframe is always included). Frames are ordered by time,
/// then hand id.
HandTrajectory script_trajectory(std::span<const HandKeyframe> keys, double rate_hz);

/// Blend of two keyframes of one hand; s in [0, 1].
HandFrame blend_keyframes(const HandKeyframe& a, const HandKeyframe& b, double s, double t);

/// Palm centre used as the hand's reference point: midpoint of the wrist and
/// the middle-finger knuckle, projected.
Vec2 palm_center(const HandFrame& frame);

void write_trajectory(std::ostream& out, const HandTrajectory& traj);
HandTrajectory read_trajectory(std::istream& in);
void save_trajectory(const std::filesystem::path& path, const HandTrajectory& traj);
HandTrajectory load_trajectory(const std::filesystem::path& path);

}  // namespace swarm
