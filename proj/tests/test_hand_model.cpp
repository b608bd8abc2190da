#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "swarm/errors.hpp"
#include "swarm/hand_model.hpp"

using namespace swarm;

namespace {

constexpr SignName kSigns[] = {SignName::Rock, SignName::Scissors, SignName::Paper,
                               SignName::ReversedPaper};

HandFrame frame(SignName s, Vec2 at = {}, double yaw = kPi / 2, double scale = 1.0) {
  WristPose w;
  w.position = at;
  w.yaw = yaw;
  return synth_hand_sign(hand_sign(s), w, scale);
}

}  // namespace

TEST(Signs, NamesRoundTrip) {
  for (SignName s : kSigns) EXPECT_EQ(parse_sign(sign_name(s)), s);
  EXPECT_FALSE(parse_sign("fist"));
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    EXPECT_EQ(parse_bone(bone_name(static_cast<BoneId>(i))), static_cast<BoneId>(i));
  }
}

TEST(Signs, PalmUp) {
  EXPECT_EQ(hand_sign(SignName::Paper, true).name, SignName::ReversedPaper);
  EXPECT_TRUE(hand_sign(SignName::Paper, true).palm_up);
  EXPECT_EQ(hand_sign(SignName::Paper, false).name, SignName::Paper);
  EXPECT_THROW(hand_sign(SignName::Rock, true), ValidationError);
  EXPECT_THROW(hand_sign(SignName::Scissors, true), ValidationError);
}

TEST(Synth, WristAtPose) {
  for (SignName s : kSigns) {
    const HandFrame f = frame(s, {120, -40});
    EXPECT_NO_THROW(f.validate(true));
    EXPECT_NEAR(f.bone(BoneId::WristRoot).x, 120, 1e-9);
    EXPECT_NEAR(f.bone(BoneId::WristRoot).y, -40, 1e-9);
    EXPECT_EQ(f.mesh.size(), canonical_mesh_size());
  }
}

TEST(Synth, FingersPointAlongYaw) {
  const HandFrame f = frame(SignName::Paper, {0, 0}, 0.0);
  EXPECT_GT(f.bone(BoneId::MiddleTip).x, 150.0);
  EXPECT_NEAR(f.bone(BoneId::MiddleTip).y, 0.0, 15.0);
  EXPECT_LT(f.bone(BoneId::ForearmStub).x, 0.0);
}

TEST(Synth, RockTipsStayNearPalm) {
  const HandFrame f = frame(SignName::Rock);
  const PlanarHand p = project_to_plane(f);
  const Vec2 wrist = p.bones[index_of(BoneId::WristRoot)];
  const Vec2 knuckle = p.bones[index_of(BoneId::Middle1)];
  const double palm = distance(wrist, knuckle);
  for (BoneId tip : {BoneId::IndexTip, BoneId::MiddleTip, BoneId::RingTip, BoneId::PinkyTip}) {
    EXPECT_LT(distance(p.bones[index_of(tip)], wrist), 1.5 * palm);
  }
  const HandFrame open = frame(SignName::Paper);
  EXPECT_GT(distance(project_to_plane(open).bones[index_of(BoneId::MiddleTip)], wrist),
            1.5 * palm);
}

TEST(Synth, ReversedPaperMirrorsPaper) {
  const PlanarHand a = project_to_plane(frame(SignName::Paper, {}, kPi / 2));
  const PlanarHand b = project_to_plane(frame(SignName::ReversedPaper, {}, kPi / 2));
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    EXPECT_NEAR(a.bones[i].x, -b.bones[i].x, 1e-9);
    EXPECT_NEAR(a.bones[i].y, b.bones[i].y, 1e-9);
  }
}

TEST(Synth, ScaleAppliedAboutWrist) {
  const HandFrame f = frame(SignName::Paper, {10, 10}, kPi / 2, 2.0);
  const PlanarHand p = project_to_plane(f);
  const PlanarHand q = project_to_plane(frame(SignName::Paper, {10, 10}, kPi / 2, 1.0));
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    EXPECT_NEAR(p.bones[i].x - 10, 2 * (q.bones[i].x - 10), 1e-9);
    EXPECT_NEAR(p.bones[i].y - 10, 2 * (q.bones[i].y - 10), 1e-9);
  }
}

TEST(Trajectory, WriteReadRoundTripIsExact) {
  const std::vector<HandKeyframe> keys{{0.0, {{0, 0}, 0.3}, SignName::Paper, 1.0, 0},
                                       {0.5, {{50, 20}, 1.1}, SignName::Rock, 1.2, 0},
                                       {0.2, {{-80, 0}, 0.0}, SignName::Scissors, 1.0, 3},
                                       {0.4, {{-60, 5}, 0.1}, SignName::Scissors, 1.0, 3}};
  const HandTrajectory t = script_trajectory(keys, 50.0);
  std::stringstream ss;
  write_trajectory(ss, t);
  const HandTrajectory u = read_trajectory(ss);
  EXPECT_EQ(t, u);
  EXPECT_EQ(u.hand_ids(), (std::vector<int>{0, 3}));
}

TEST(Trajectory, ScriptSampling) {
  const std::vector<HandKeyframe> keys{{0.0, {}, SignName::Paper}, {0.105, {}, SignName::Paper}};
  const HandTrajectory t = script_trajectory(keys, 50.0);
  ASSERT_EQ(t.frames.size(), 7u);
  EXPECT_DOUBLE_EQ(t.frames[5].t, 0.1);
  EXPECT_DOUBLE_EQ(t.frames.back().t, 0.105);
}

TEST(Trajectory, ParseErrorsCarryLocation) {
  std::stringstream bad_header("# nothandtraj bones=24 mesh=0\n");
  EXPECT_THROW(read_trajectory(bad_header), ParseError);

  std::stringstream empty("");
  EXPECT_THROW(read_trajectory(empty), ParseError);

  std::string row = "0,0,1";
  for (int i = 0; i < 72; ++i) row += ",0";
  std::stringstream short_row("# handtraj bones=24 mesh=0 rate_hz=50\n" + row + "\n0,0,1,2\n");
  try {
    read_trajectory(short_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
  }

  std::stringstream nan_row("# handtraj bones=24 mesh=0 rate_hz=50\n0,0,x\n");
  try {
    read_trajectory(nan_row);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.field(), 2u);
  }

  std::stringstream bad_scale("# handtraj bones=24 mesh=0 rate_hz=50\n" +
                              std::string("0,0,0") + row.substr(5) + "\n");
  EXPECT_THROW(read_trajectory(bad_scale), ParseError);
}

TEST(Trajectory, ValidateRejectsDisorder) {
  HandTrajectory t;
  t.frames.push_back(frame(SignName::Paper));
  t.frames.push_back(frame(SignName::Paper));
  EXPECT_THROW(t.validate(), ValidationError);
  t.frames[1].t = 0.02;
  EXPECT_NO_THROW(t.validate());
  t.frames[1].mesh.pop_back();
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(Interpolate, HitsStoredFramesAndBlends) {
  HandTrajectory t;
  HandFrame a = frame(SignName::Paper, {0, 0});
  HandFrame b = frame(SignName::Paper, {100, 0});
  b.t = 1.0;
  t.frames = {a, b};
  EXPECT_EQ(interpolate_frame(t, 0.0), a);
  EXPECT_EQ(interpolate_frame(t, 1.0), b);
  const HandFrame m = interpolate_frame(t, 0.25);
  EXPECT_NEAR(m.bone(BoneId::WristRoot).x, 25.0, 1e-9);
  EXPECT_NEAR(m.mesh[7].x, 0.75 * a.mesh[7].x + 0.25 * b.mesh[7].x, 1e-9);
  EXPECT_THROW(interpolate_frame(t, 5.0), RangeError);
  EXPECT_THROW(interpolate_frame(t, 0.5, 9), RangeError);
}

TEST(Keyframes, BlendShortestYawArc) {
  HandKeyframe a{0.0, {{0, 0}, 3.0}, SignName::Paper};
  HandKeyframe b{1.0, {{0, 0}, -3.0}, SignName::Paper};
  const HandFrame m = blend_keyframes(a, b, 0.5, 0.5);
  const Vec3 d = m.bone(BoneId::Middle1) - m.bone(BoneId::WristRoot);
  EXPECT_NEAR(std::abs(wrap_angle(std::atan2(d.y, d.x) - kPi)), 0.0, 0.2);
}

TEST(Keyframes, PalmCenter) {
  const HandFrame f = frame(SignName::Paper, {30, 40});
  const PlanarHand p = project_to_plane(f);
  const Vec2 c = palm_center(f);
  const Vec2 ref = 0.5 * (p.bones[index_of(BoneId::WristRoot)] + p.bones[index_of(BoneId::Middle1)]);
  EXPECT_NEAR(c.x, ref.x, 1e-12);
  EXPECT_NEAR(c.y, ref.y, 1e-12);
}
