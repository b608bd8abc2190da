#include "swarm/hand_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "swarm/errors.hpp"

namespace swarm {

namespace {

constexpr std::array<std::string_view, kBoneCount> kBoneNames = {
    "wrist_root", "forearm_stub", "thumb0",  "thumb1",     "thumb2",     "thumb3",
    "index1",     "index2",       "index3",  "middle1",    "middle2",    "middle3",
    "ring1",      "ring2",        "ring3",   "pinky0",     "pinky1",     "pinky2",
    "pinky3",     "thumb_tip",    "index_tip", "middle_tip", "ring_tip", "pinky_tip"};

// ---------------------------------------------------------------------------
// Canonical right hand, palm down, wrist-local frame: +x along the fingers,
// +y toward the thumb, +z up.

struct FingerGeometry {
  Vec3 mcp;
  std::array<double, 3> length;  // proximal, middle, distal
  std::array<double, 3> radius;
  std::array<BoneId, 4> chain;  // MCP, PIP, DIP, tip
};

constexpr std::array<FingerGeometry, 4> kFingers = {{
    {{86.0, 22.0, 0.0}, {40.0, 23.0, 20.0}, {9.0, 8.0, 7.0},
     {BoneId::Index1, BoneId::Index2, BoneId::Index3, BoneId::IndexTip}},
    {{90.0, 3.0, 0.0}, {45.0, 27.0, 21.0}, {9.0, 8.0, 7.0},
     {BoneId::Middle1, BoneId::Middle2, BoneId::Middle3, BoneId::MiddleTip}},
    {{84.0, -15.0, 0.0}, {42.0, 26.0, 21.0}, {8.5, 7.5, 7.0},
     {BoneId::Ring1, BoneId::Ring2, BoneId::Ring3, BoneId::RingTip}},
    {{74.0, -31.0, 0.0}, {33.0, 19.0, 19.0}, {8.0, 7.0, 6.5},
     {BoneId::Pinky1, BoneId::Pinky2, BoneId::Pinky3, BoneId::PinkyTip}},
}};

constexpr Vec3 kWrist{0.0, 0.0, 0.0};
constexpr Vec3 kForearmStub{-30.0, 0.0, 0.0};
constexpr Vec3 kThumb0{12.0, 18.0, -4.0};
constexpr Vec3 kPinky0{12.0, -18.0, 0.0};
// Trapezium segment (Thumb0 -> Thumb1) is rigid with the palm.
constexpr double kTrapeziumLength = 15.0;
constexpr double kTrapeziumYawDeg = 60.0;
constexpr double kTrapeziumPitchDeg = 10.0;
constexpr std::array<double, 3> kThumbLength = {40.0, 30.0, 25.0};
constexpr std::array<double, 3> kThumbRadius = {11.0, 10.0, 9.0};

constexpr double kMeshPitch = 5.0;
// Ribbon samples sit inside the finger width so every sample is strictly
// inside the finger capsule.
constexpr double kRibbonInset = 0.6;
constexpr double kPalmInset = 2.0;

constexpr double deg(double d) { return d * kPi / 180.0; }

Vec3 direction(double yaw_rad, double pitch_down_rad) {
  const double h = std::cos(pitch_down_rad);
  return {h * std::cos(yaw_rad), h * std::sin(yaw_rad), -std::sin(pitch_down_rad)};
}

Vec3 lateral(double yaw_rad) { return {-std::sin(yaw_rad), std::cos(yaw_rad), 0.0}; }

Vec3 thumb1_position() {
  return kThumb0 + direction(deg(kTrapeziumYawDeg), deg(kTrapeziumPitchDeg)) * kTrapeziumLength;
}

std::array<Vec3, 8> palm_bones_local() {
  return {kWrist,  kThumb0,        thumb1_position(), kFingers[0].mcp,
          kFingers[1].mcp, kFingers[2].mcp, kFingers[3].mcp,   kPinky0};
}

// Convex hull (counterclockwise) of the palm bones projected to the plane.
std::vector<Vec2> palm_hull_local() {
  std::vector<Vec2> pts;
  for (const Vec3& b : palm_bones_local()) pts.push_back(b.xy());
  std::sort(pts.begin(), pts.end(),
            [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i - 1] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// Palm samples are fixed in the wrist frame: a regular grid clipped to the
// palm-bone hull shrunk by kPalmInset. Because the hull is spanned by bones,
// every sample stays a convex combination of palm bones under interpolation.
const std::vector<Vec3>& palm_samples_local() {
  static const std::vector<Vec3> samples = [] {
    const std::vector<Vec2> hull = palm_hull_local();
    double min_x = hull[0].x, max_x = hull[0].x, min_y = hull[0].y, max_y = hull[0].y;
    for (const Vec2& p : hull) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    std::vector<Vec3> out;
    for (double x = std::floor(min_x / kMeshPitch) * kMeshPitch; x <= max_x; x += kMeshPitch) {
      for (double y = std::floor(min_y / kMeshPitch) * kMeshPitch; y <= max_y; y += kMeshPitch) {
        const Vec2 p{x, y};
        bool inside = true;
        for (std::size_t i = 0; i < hull.size() && inside; ++i) {
          const Vec2 a = hull[i];
          const Vec2 e = normalized(hull[(i + 1) % hull.size()] - a);
          if (cross(e, p - a) < kPalmInset) inside = false;
        }
        if (inside) out.push_back({x, y, 0.0});
      }
    }
    return out;
  }();
  return samples;
}

void add_ribbon(std::vector<Vec3>& mesh, const Vec3& a, const Vec3& b, double radius,
                const Vec3& side) {
  const double len = norm(b - a);
  const int n = std::max(1, static_cast<int>(std::lround(len / kMeshPitch)));
  for (int j = 0; j < n; ++j) {
    const double u = (j + 0.5) / n;
    const Vec3 c = a + (b - a) * u;
    for (const double v : {-kRibbonInset, 0.0, kRibbonInset}) {
      mesh.push_back(c + side * (v * radius));
    }
  }
}

struct LocalHand {
  std::array<Vec3, kBoneCount> bones{};
  std::vector<Vec3> mesh;
};

LocalHand build_local(const HandSign& sign) {
  LocalHand h;
  auto set = [&h](BoneId id, const Vec3& p) { h.bones[index_of(id)] = p; };
  set(BoneId::WristRoot, kWrist);
  set(BoneId::ForearmStub, kForearmStub);
  set(BoneId::Thumb0, kThumb0);
  set(BoneId::Thumb1, thumb1_position());
  set(BoneId::Pinky0, kPinky0);

  h.mesh = palm_samples_local();

  Vec3 p = thumb1_position();
  const std::array<BoneId, 3> thumb_chain = {BoneId::Thumb2, BoneId::Thumb3, BoneId::ThumbTip};
  for (std::size_t s = 0; s < 3; ++s) {
    const double yaw = deg(sign.thumb.yaw_deg[s]);
    const Vec3 q = p + direction(yaw, deg(sign.thumb.pitch_deg[s])) * kThumbLength[s];
    set(thumb_chain[s], q);
    add_ribbon(h.mesh, p, q, kThumbRadius[s], lateral(yaw));
    p = q;
  }

  for (std::size_t f = 0; f < 4; ++f) {
    const FingerGeometry& g = kFingers[f];
    const FingerFlex& flex = sign.fingers[f];
    const double yaw = deg(flex.splay_deg);
    const std::array<double, 3> bends = {flex.mcp_deg, flex.pip_deg, flex.dip_deg};
    Vec3 q = g.mcp;
    set(g.chain[0], q);
    double cumulative = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      cumulative += bends[s];
      const Vec3 next = q + direction(yaw, deg(cumulative)) * g.length[s];
      set(g.chain[s + 1], next);
      add_ribbon(h.mesh, q, next, g.radius[s], lateral(yaw));
      q = next;
    }
  }
  return h;
}

Vec3 to_world(const Vec3& local, const WristPose& wrist, bool palm_up) {
  // palm up = half turn about the hand's long axis
  const Vec3 l = palm_up ? Vec3{local.x, -local.y, -local.z} : local;
  const Vec2 xy = wrist.position + rotate(l.xy(), wrist.yaw);
  return {xy.x, xy.y, wrist.height + l.z};
}

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

std::vector<std::size_t> indices_of(const HandTrajectory& traj, int hand_id) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.frames.size(); ++i) {
    if (traj.frames[i].hand_id == hand_id) idx.push_back(i);
  }
  return idx;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string_view bone_name(BoneId id) { return kBoneNames[index_of(id)]; }

std::optional<BoneId> parse_bone(std::string_view name) {
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    if (kBoneNames[i] == name) return static_cast<BoneId>(i);
  }
  return std::nullopt;
}

std::string_view sign_name(SignName s) {
  switch (s) {
    case SignName::Rock: return "rock";
    case SignName::Scissors: return "scissors";
    case SignName::Paper: return "paper";
    case SignName::ReversedPaper: return "reversed_paper";
  }
  return "paper";
}

std::optional<SignName> parse_sign(std::string_view s) {
  if (s == "rock") return SignName::Rock;
  if (s == "scissors") return SignName::Scissors;
  if (s == "paper") return SignName::Paper;
  if (s == "reversed_paper" || s == "reversed-paper") return SignName::ReversedPaper;
  return std::nullopt;
}

HandSign hand_sign(SignName name) {
  constexpr FingerFlex kCurled{0.0, 85.0, 100.0, 70.0};
  constexpr ThumbFlex kThumbOpen{{45.0, 35.0, 30.0}, {10.0, 0.0, 0.0}};
  constexpr ThumbFlex kThumbFolded{{40.0, -10.0, -40.0}, {35.0, 25.0, 15.0}};

  HandSign s;
  s.name = name;
  switch (name) {
    case SignName::Rock:
      s.fingers = {FingerFlex{4.0, 85.0, 100.0, 70.0}, kCurled,
                   FingerFlex{-4.0, 85.0, 100.0, 70.0}, FingerFlex{-8.0, 85.0, 100.0, 70.0}};
      s.thumb = kThumbFolded;
      break;
    case SignName::Scissors:
      s.fingers = {FingerFlex{10.0, 0.0, 0.0, 0.0}, FingerFlex{-6.0, 0.0, 0.0, 0.0},
                   FingerFlex{-4.0, 85.0, 100.0, 70.0}, FingerFlex{-8.0, 85.0, 100.0, 70.0}};
      s.thumb = kThumbFolded;
      break;
    case SignName::Paper:
    case SignName::ReversedPaper:
      s.fingers = {FingerFlex{12.0, 0.0, 0.0, 0.0}, FingerFlex{0.0, 0.0, 0.0, 0.0},
                   FingerFlex{-12.0, 0.0, 0.0, 0.0}, FingerFlex{-24.0, 0.0, 0.0, 0.0}};
      s.thumb = kThumbOpen;
      break;
  }
  s.palm_up = name == SignName::ReversedPaper;
  return s;
}

void HandFrame::validate(bool require_mesh) const {
  if (!std::isfinite(t)) throw ValidationError("hand frame: non-finite timestamp");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("hand frame: scale must be positive");
  }
  for (const Vec3& b : bones) {
    if (!finite(b)) throw ValidationError("hand frame: non-finite bone position");
  }
  for (const Vec3& m : mesh) {
    if (!finite(m)) throw ValidationError("hand frame: non-finite mesh vertex");
  }
  if (require_mesh && mesh.empty()) throw ValidationError("hand frame: mesh required");
}

std::vector<int> HandTrajectory::hand_ids() const {
  std::vector<int> ids;
  for (const HandFrame& f : frames) ids.push_back(f.hand_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<HandFrame> HandTrajectory::frames_of(int hand_id) const {
  std::vector<HandFrame> out;
  for (const HandFrame& f : frames) {
    if (f.hand_id == hand_id) out.push_back(f);
  }
  return out;
}

void HandTrajectory::validate() const {
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].validate();
    if (i > 0 && frames[i].t < frames[i - 1].t) {
      throw ValidationError("trajectory: timestamps decrease at frame " + std::to_string(i));
    }
  }
  for (const int id : hand_ids()) {
    const std::vector<std::size_t> idx = indices_of(*this, id);
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const HandFrame& prev = frames[idx[k - 1]];
      const HandFrame& cur = frames[idx[k]];
      if (!(cur.t > prev.t)) {
        throw ValidationError("trajectory: timestamps not strictly increasing for hand " +
                              std::to_string(id) + " at frame " + std::to_string(idx[k]));
      }
      if (cur.mesh.size() != prev.mesh.size()) {
        throw ValidationError("trajectory: mesh size changes for hand " + std::to_string(id));
      }
    }
  }
}

HandFrame synth_hand_sign(const HandSign& sign, const WristPose& wrist, double scale,
                          int hand_id, double t) {
  if (!(scale > 0.0)) throw ValidationError("synth_hand_sign: scale must be positive");
  const LocalHand local = build_local(sign);
  HandFrame f;
  f.t = t;
  f.hand_id = hand_id;
  f.scale = scale;
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    f.bones[i] = to_world(local.bones[i], wrist, sign.palm_up);
  }
  f.mesh.reserve(local.mesh.size());
  for (const Vec3& m : local.mesh) f.mesh.push_back(to_world(m, wrist, sign.palm_up));
  return f;
}

std::size_t canonical_mesh_size() {
  return build_local(hand_sign(SignName::Paper)).mesh.size();
}

PlanarHand project_to_plane(const HandFrame& frame) {
  const Vec2 wrist = frame.bone(BoneId::WristRoot).xy();
  const double s = frame.scale;
  PlanarHand out;
  out.bones.reserve(kBoneCount);
  for (const Vec3& b : frame.bones) out.bones.push_back(wrist + (b.xy() - wrist) * s);
  out.mesh.reserve(frame.mesh.size());
  for (const Vec3& m : frame.mesh) out.mesh.push_back(wrist + (m.xy() - wrist) * s);
  return out;
}

HandFrame lerp_frames(const HandFrame& a, const HandFrame& b, double s) {
  if (a.mesh.size() != b.mesh.size()) {
    throw ValidationError("lerp_frames: mesh sizes differ");
  }
  auto mix = [s](const Vec3& p, const Vec3& q) { return p + (q - p) * s; };
  HandFrame f;
  f.t = a.t + (b.t - a.t) * s;
  f.hand_id = a.hand_id;
  f.scale = a.scale + (b.scale - a.scale) * s;
  for (std::size_t i = 0; i < kBoneCount; ++i) f.bones[i] = mix(a.bones[i], b.bones[i]);
  f.mesh.resize(a.mesh.size());
  for (std::size_t i = 0; i < a.mesh.size(); ++i) f.mesh[i] = mix(a.mesh[i], b.mesh[i]);
  return f;
}

HandSign hand_sign(SignName name, bool palm_up) {
  if (!palm_up) return hand_sign(name);
  if (name == SignName::Paper || name == SignName::ReversedPaper) {
    return hand_sign(SignName::ReversedPaper);
  }
  throw ValidationError("palm_up is only defined for the paper sign");
}

HandFrame blend_keyframes(const HandKeyframe& a, const HandKeyframe& b, double s, double t) {
  WristPose pose;
  pose.position = a.wrist.position + (b.wrist.position - a.wrist.position) * s;
  pose.yaw = a.wrist.yaw + wrap_angle(b.wrist.yaw - a.wrist.yaw) * s;
  pose.height = a.wrist.height + (b.wrist.height - a.wrist.height) * s;
  const double scale = a.scale + (b.scale - a.scale) * s;
  HandFrame f = synth_hand_sign(hand_sign(a.sign), pose, scale, a.hand_id, t);
  if (a.sign != b.sign && s > 0.0) {
    const HandFrame g = synth_hand_sign(hand_sign(b.sign), pose, scale, a.hand_id, t);
    f = lerp_frames(f, g, s);
    f.t = t;
    f.scale = scale;
  }
  return f;
}

HandTrajectory script_trajectory(std::span<const HandKeyframe> keys, double rate_hz) {
  if (!(rate_hz > 0.0)) throw ValidationError("script: rate_hz must be positive");
  std::map<int, std::vector<HandKeyframe>> by_hand;
  for (const HandKeyframe& k : keys) {
    auto& v = by_hand[k.hand_id];
    if (!v.empty() && !(k.t > v.back().t)) {
      throw ValidationError("script: keyframe times must increase per hand");
    }
    v.push_back(k);
  }
  HandTrajectory traj;
  traj.rate_hz = rate_hz;
  for (const auto& [id, ks] : by_hand) {
    const double t0 = ks.front().t;
    const double t1 = ks.back().t;
    std::size_t seg = 0;
    for (long n = 0;; ++n) {
      double t = t0 + static_cast<double>(n) / rate_hz;
      const bool last = t >= t1;
      if (last) t = t1;
      while (seg + 1 < ks.size() - 1 && ks[seg + 1].t <= t) ++seg;
      const HandKeyframe& a = ks[std::min(seg, ks.size() - 1)];
      if (ks.size() == 1) {
        traj.frames.push_back(blend_keyframes(a, a, 0.0, t));
      } else {
        const HandKeyframe& b = ks[seg + 1];
        traj.frames.push_back(blend_keyframes(a, b, (t - a.t) / (b.t - a.t), t));
      }
      if (last) break;
    }
  }
  std::stable_sort(traj.frames.begin(), traj.frames.end(),
                   [](const HandFrame& x, const HandFrame& y) {
                     if (x.t != y.t) return x.t < y.t;
                     return x.hand_id < y.hand_id;
                   });
  return traj;
}

Vec2 palm_center(const HandFrame& frame) {
  const PlanarHand p = project_to_plane(frame);
  return 0.5 * (p.bones[index_of(BoneId::WristRoot)] + p.bones[index_of(BoneId::Middle1)]);
}

HandFrame interpolate_frame(const HandTrajectory& traj, double t, int hand_id) {
  const std::vector<std::size_t> idx = indices_of(traj, hand_id);
  if (idx.empty()) throw RangeError("interpolate_frame: no frames for hand");
  const double first = traj.frames[idx.front()].t;
  const double last = traj.frames[idx.back()].t;
  if (!(t >= first && t <= last)) {
    throw RangeError("interpolate_frame: t outside [" + std::to_string(first) + ", " +
                     std::to_string(last) + "]");
  }
  // first stored frame with timestamp >= t
  const auto it = std::lower_bound(idx.begin(), idx.end(), t, [&traj](std::size_t i, double v) {
    return traj.frames[i].t < v;
  });
  const HandFrame& hi = traj.frames[*it];
  if (hi.t == t) return hi;
  const HandFrame& lo = traj.frames[*(it - 1)];
  HandFrame f = lerp_frames(lo, hi, (t - lo.t) / (hi.t - lo.t));
  f.t = t;
  return f;
}

void write_trajectory(std::ostream& out, const HandTrajectory& traj) {
  const std::size_t mesh = traj.frames.empty() ? 0 : traj.frames.front().mesh.size();
  for (const HandFrame& f : traj.frames) {
    if (f.mesh.size() != mesh) throw ValidationError("write_trajectory: mesh size varies");
  }
  std::string line = "# handtraj bones=" + std::to_string(kBoneCount) +
                     " mesh=" + std::to_string(mesh) + " rate_hz=";
  append_number(line, traj.rate_hz);
  out << line << '\n';
  for (const HandFrame& f : traj.frames) {
    line.clear();
    append_number(line, f.t);
    line += ',';
    line += std::to_string(f.hand_id);
    line += ',';
    append_number(line, f.scale);
    auto put = [&line](const Vec3& v) {
      for (const double c : {v.x, v.y, v.z}) {
        line += ',';
        append_number(line, c);
      }
    };
    for (const Vec3& b : f.bones) put(b);
    for (const Vec3& m : f.mesh) put(m);
    out << line << '\n';
  }
}

HandTrajectory read_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1, 0);
  std::size_t bones = 0;
  std::size_t mesh = 0;
  HandTrajectory traj;
  {
    std::istringstream hs(line);
    std::string tok;
    hs >> tok;
    std::string magic;
    hs >> magic;
    if (tok != "#" || magic != "handtraj") throw ParseError("bad header magic", 1, 0);
    bool have_bones = false;
    bool have_mesh = false;
    std::size_t field = 1;
    while (hs >> tok) {
      ++field;
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw ParseError("bad header entry '" + tok + "'", 1, field);
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
        if (key == "bones") {
          bones = std::stoul(val);
          have_bones = true;
        } else if (key == "mesh") {
          mesh = std::stoul(val);
          have_mesh = true;
        } else if (key == "rate_hz") {
          traj.rate_hz = std::stod(val);
        }
      } catch (const std::exception&) {
        throw ParseError("bad header value '" + tok + "'", 1, field);
      }
    }
    if (!have_bones || !have_mesh) throw ParseError("header lacks bones/mesh count", 1, 0);
    if (bones != kBoneCount) {
      throw ParseError("bone count " + std::to_string(bones) + " != " +
                           std::to_string(kBoneCount),
                       1, 0);
    }
  }

  const std::size_t expected = 3 + 3 * bones + 3 * mesh;
  std::size_t row = 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    values.clear();
    std::size_t field = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      const char* comma = std::find(p, end, ',');
      double v = 0.0;
      const char* s = p;
      while (s < comma && *s == ' ') ++s;
      const auto res = std::from_chars(s, comma, v);
      if (res.ec != std::errc() || res.ptr != comma) {
        throw ParseError("not a number: '" + std::string(p, comma) + "'", row, field);
      }
      values.push_back(v);
      ++field;
      if (comma == end) break;
      p = comma + 1;
    }
    if (values.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, got " +
                           std::to_string(values.size()),
                       row, values.size());
    }
    HandFrame f;
    f.t = values[0];
    if (values[1] != std::floor(values[1])) throw ParseError("hand_id not an integer", row, 1);
    f.hand_id = static_cast<int>(values[1]);
    f.scale = values[2];
    if (!(f.scale > 0.0)) throw ParseError("scale must be positive", row, 2);
    std::size_t k = 3;
    for (std::size_t b = 0; b < kBoneCount; ++b, k += 3) {
      f.bones[b] = {values[k], values[k + 1], values[k + 2]};
    }
    f.mesh.resize(mesh);
    for (std::size_t m = 0; m < mesh; ++m, k += 3) {
      f.mesh[m] = {values[k], values[k + 1], values[k + 2]};
    }
    traj.frames.push_back(std::move(f));
  }
  traj.validate();
  return traj;
}

void save_trajectory(const std::filesystem::path& path, const HandTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory " + path.string());
  write_trajectory(out, traj);
}

HandTrajectory load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory " + path.string());
  return read_trajectory(in);
}

}  // namespace swarm
