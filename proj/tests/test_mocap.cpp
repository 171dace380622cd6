#include <catch2/catch_amalgamated.hpp>

#include "corrgen/mocap.hpp"

using namespace corrgen;

namespace {

const char* kTwoJointBvh = R"(HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0 0.45 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 0.25 0
    }
  }
}
MOTION
Frames: 1
Frame Time: 0.04
0.1 0.9 -0.2 30 0 0 0 45 0
)";

}  // namespace

TEST_CASE("parse_bvh captures hierarchy and channels", "[mocap]") {
  const MotionClip clip = parse_bvh(kTwoJointBvh);
  REQUIRE(clip.joints.size() == 2);
  CHECK(clip.joints[0].name == "Hips");
  CHECK(clip.joints[0].parent == -1);
  CHECK(clip.joints[1].name == "Chest");
  CHECK(clip.joints[1].parent == 0);
  CHECK(clip.joints[1].offset.isApprox(Vec3(0, 0.45, 0)));
  REQUIRE(clip.joints[1].end_site.has_value());
  CHECK(clip.joints[1].end_site->isApprox(Vec3(0, 0.25, 0)));
  CHECK(clip.channel_count == 9);
  CHECK(clip.frame_count == 1);
  CHECK(clip.frame_time == 0.04);
  CHECK(clip.value(0, 0) == 0.1);
  CHECK(clip.value(0, 3) == 30.0);
  CHECK(clip.value(0, 7) == 45.0);
}

TEST_CASE("parse_bvh accepts zero frames", "[mocap]") {
  std::string text(kTwoJointBvh);
  text = text.substr(0, text.find("Frames:")) + "Frames: 0\nFrame Time: 0.04\n";
  const MotionClip clip = parse_bvh(text);
  CHECK(clip.frame_count == 0);
  CHECK(clip.values.empty());
}

TEST_CASE("parse_bvh errors carry positions", "[mocap]") {
  SECTION("wrong value count names the frame") {
    std::string text(kTwoJointBvh);
    text.resize(text.rfind("45 0"));  // truncate mid-frame
    try {
      parse_bvh(text);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("frame 0") != std::string::npos);
    }
  }

  SECTION("syntax errors include the line number") {
    std::string text(kTwoJointBvh);
    const auto pos = text.find("CHANNELS 3");
    text.replace(pos, 10, "CHANNELX 3");
    try {
      parse_bvh(text);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 9") != std::string::npos);
    }
  }

  SECTION("unsupported channel token") {
    std::string text(kTwoJointBvh);
    const auto pos = text.find("Zrotation Xrotation Yrotation");
    text.replace(pos, 9, "Wrotation");
    CHECK_THROWS_WITH(parse_bvh(text), Catch::Matchers::ContainsSubstring("unsupported channel"));
  }

  SECTION("unsupported rotation order") {
    std::string text(kTwoJointBvh);
    const auto pos = text.find("CHANNELS 3 Zrotation Xrotation Yrotation");
    text.replace(pos, 41, "CHANNELS 3 Yrotation Xrotation Zrotation");
    CHECK_THROWS_WITH(parse_bvh(text), Catch::Matchers::ContainsSubstring("rotation order"));
  }
}

TEST_CASE("bvh round trip is exact", "[mocap]") {
  const MotionClip first = parse_bvh(kTwoJointBvh);
  const MotionClip second = parse_bvh(serialize_bvh(first));
  REQUIRE(second.joints.size() == first.joints.size());
  for (size_t j = 0; j < first.joints.size(); ++j) {
    CHECK(second.joints[j].name == first.joints[j].name);
    CHECK(second.joints[j].parent == first.joints[j].parent);
    CHECK(second.joints[j].offset == first.joints[j].offset);
    CHECK(second.joints[j].channels == first.joints[j].channels);
  }
  CHECK(second.frame_time == first.frame_time);
  CHECK(second.values == first.values);
}

TEST_CASE("retarget converts Euler channels to axis-angle", "[mocap]") {
  RetargetMap map;
  map.model_joint_count = 4;
  map.joints["Hips"] = RetargetEntry{0, Mat3::Identity()};
  map.joints["Chest"] = RetargetEntry{1, Mat3::Identity()};
  validate_retarget_map(map);

  SECTION("all-zero frame gives the identity pose") {
    std::string text(kTwoJointBvh);
    text.replace(text.find("0.1 0.9 -0.2 30 0 0 0 45 0"), 26, "0 0 0 0 0 0 0 0 0 ");
    const MotionClip clip = parse_bvh(text);
    const PoseParams pose = retarget(clip, 0, map);
    for (const auto& r : pose.joint_rotations) CHECK(r.norm() == 0.0);
    CHECK(pose.root_translation.norm() == 0.0);
  }

  SECTION("single z-rotation of 90 degrees") {
    std::string text(kTwoJointBvh);
    text.replace(text.find("0.1 0.9 -0.2 30 0 0 0 45 0"), 26, "0 0 0 90 0 0 0 0 0 ");
    const MotionClip clip = parse_bvh(text);
    const PoseParams pose = retarget(clip, 0, map);
    CHECK((pose.joint_rotations[0] - Vec3(0, 0, M_PI / 2)).norm() < 1e-9);
  }

  SECTION("unmapped source joints are ignored") {
    RetargetMap partial;
    partial.model_joint_count = 4;
    partial.joints["Chest"] = RetargetEntry{1, Mat3::Identity()};
    const MotionClip clip = parse_bvh(kTwoJointBvh);
    const PoseParams pose = retarget(clip, 0, partial);
    CHECK(pose.joint_rotations[0].norm() == 0.0);  // Hips ignored
    CHECK(pose.joint_rotations[1].norm() > 0.0);
    CHECK(pose.root_translation.norm() == 0.0);    // root unmapped
  }

  SECTION("frame out of range") {
    const MotionClip clip = parse_bvh(kTwoJointBvh);
    CHECK_THROWS_AS(retarget(clip, 1, map), Error);
  }

  SECTION("axis correction conjugates the rotation") {
    RetargetMap swapped;
    swapped.model_joint_count = 4;
    RetargetEntry e;
    e.model_joint = 0;
    e.axis_correction = Mat3::Zero();  // model x <- source y, y <- source x, z <- -z
    e.axis_correction(0, 1) = 1;
    e.axis_correction(1, 0) = 1;
    e.axis_correction(2, 2) = -1;
    swapped.joints["Hips"] = e;
    std::string text(kTwoJointBvh);
    text.replace(text.find("0.1 0.9 -0.2 30 0 0 0 45 0"), 26, "0 0 0 0 90 0 0 0 0 ");
    const MotionClip clip = parse_bvh(text);
    const PoseParams pose = retarget(clip, 0, swapped);
    // source 90 about x becomes model 90 about y
    CHECK((pose.joint_rotations[0] - Vec3(0, M_PI / 2, 0)).norm() < 1e-9);
  }
}

TEST_CASE("retarget map validation", "[mocap]") {
  RetargetMap map;
  map.model_joint_count = 2;
  map.joints["A"] = RetargetEntry{1, Mat3::Identity()};
  map.joints["B"] = RetargetEntry{1, Mat3::Identity()};
  CHECK_THROWS_AS(validate_retarget_map(map), Error);
  map.joints["B"] = RetargetEntry{5, Mat3::Identity()};
  CHECK_THROWS_AS(validate_retarget_map(map), Error);
}

TEST_CASE("sample_pose interpolates between frames", "[mocap]") {
  std::vector<PoseParams> seq(3);
  for (auto& p : seq) p.joint_rotations.assign(1, Vec3::Zero());
  seq[1].joint_rotations[0] = Vec3(0, 0, M_PI / 2);
  seq[1].root_translation = Vec3(1, 0, 0);
  seq[2].joint_rotations[0] = Vec3(0, 0, M_PI);
  seq[2].root_translation = Vec3(2, 0, 0);
  const double ft = 0.1;

  SECTION("exact frame times return the frame") {
    const PoseParams p = sample_pose(seq, 0.1, ft);
    CHECK((p.joint_rotations[0] - seq[1].joint_rotations[0]).norm() == 0.0);
    CHECK(p.root_translation == seq[1].root_translation);
  }

  SECTION("midpoint of 0 and 90 degrees is 45 degrees") {
    const PoseParams p = sample_pose(seq, 0.05, ft);
    CHECK((p.joint_rotations[0] - Vec3(0, 0, M_PI / 4)).norm() < 1e-9);
    CHECK((p.root_translation - Vec3(0.5, 0, 0)).norm() < 1e-12);
  }

  SECTION("time beyond the clip clamps to the last frame") {
    const PoseParams p = sample_pose(seq, 5.0, ft);
    CHECK((p.joint_rotations[0] - seq[2].joint_rotations[0]).norm() == 0.0);
  }

  SECTION("empty sequence is an error") {
    CHECK_THROWS_AS(sample_pose({}, 0.0, ft), Error);
  }

  SECTION("interpolated rotations stay orthonormal") {
    Rng rng(31);
    std::vector<PoseParams> pair(2);
    for (auto& p : pair) {
      p.joint_rotations.assign(1, Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3),
                                       rng.uniform(-3, 3)));
    }
    for (int i = 0; i <= 20; ++i) {
      const PoseParams p = sample_pose(pair, 0.1 * i / 20.0, 0.1);
      const Mat3 r = rodrigues(p.joint_rotations[0]);
      CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-9);
    }
  }
}
