#pragma once

#include "corrgen/body_model.hpp"
#include "corrgen/common.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace corrgen {

struct BvhJoint {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();       // rest offset from parent, meters
  std::vector<std::string> channels;
  std::optional<Vec3> end_site;
};

struct MotionClip {
  std::vector<BvhJoint> joints;
  int frame_count = 0;
  double frame_time = 1.0 / 30.0;   // seconds
  std::vector<double> values;       // frame-major, file channel order
  int channel_count = 0;

  int channel_offset(int joint) const {
    int off = 0;
    for (int j = 0; j < joint; ++j) off += static_cast<int>(joints[j].channels.size());
    return off;
  }
  double value(int frame, int channel) const {
    return values[static_cast<size_t>(frame) * channel_count + channel];
  }
  double duration() const { return frame_count > 0 ? (frame_count - 1) * frame_time : 0.0; }
};

// ---------------------------------------------------------------- bvh parse

namespace detail {

struct BvhLexer {
  std::istringstream in;
  int line = 1;
  explicit BvhLexer(const std::string& text) : in(text) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ParseError, "bvh line " + std::to_string(line) + ": " + what);
  }

  std::optional<std::string> next() {
    std::string tok;
    while (true) {
      const int c = in.peek();
      if (c == EOF) return std::nullopt;
      if (c == '\n') {
        ++line;
        in.get();
        continue;
      }
      if (std::isspace(c)) {
        in.get();
        continue;
      }
      break;
    }
    in >> tok;
    return tok;
  }

  std::string expect_token() {
    auto t = next();
    if (!t) error("unexpected end of file");
    return *t;
  }

  void expect(const std::string& want) {
    const std::string got = expect_token();
    if (got != want) error("expected '" + want + "', got '" + got + "'");
  }

  double expect_number() {
    const std::string tok = expect_token();
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) error("expected a number, got '" + tok + "'");
    return v;
  }
};

inline bool is_rotation_channel(const std::string& c) {
  return c == "Xrotation" || c == "Yrotation" || c == "Zrotation";
}

inline bool is_position_channel(const std::string& c) {
  return c == "Xposition" || c == "Yposition" || c == "Zposition";
}

inline void parse_bvh_joint(BvhLexer& lex, MotionClip& clip, int parent,
                            const std::string& name) {
  const int index = static_cast<int>(clip.joints.size());
  clip.joints.push_back(BvhJoint{name, parent});
  lex.expect("{");
  lex.expect("OFFSET");
  Vec3 off;
  for (int c = 0; c < 3; ++c) off[c] = lex.expect_number();
  clip.joints[index].offset = off;
  lex.expect("CHANNELS");
  const int n = static_cast<int>(lex.expect_number());
  std::string rot_order;
  for (int c = 0; c < n; ++c) {
    const std::string ch = lex.expect_token();
    if (is_rotation_channel(ch)) rot_order += ch[0];
    else if (!is_position_channel(ch)) lex.error("unsupported channel '" + ch + "'");
    clip.joints[index].channels.push_back(ch);
  }
  if (!rot_order.empty() && rot_order != "XYZ" && rot_order != "ZXY" && rot_order != "ZYX")
    lex.error("unsupported rotation order '" + rot_order + "' (XYZ, ZXY, ZYX supported)");

  while (true) {
    const std::string tok = lex.expect_token();
    if (tok == "}") return;
    if (tok == "JOINT") {
      parse_bvh_joint(lex, clip, index, lex.expect_token());
    } else if (tok == "End") {
      lex.expect("Site");
      lex.expect("{");
      lex.expect("OFFSET");
      Vec3 end;
      for (int c = 0; c < 3; ++c) end[c] = lex.expect_number();
      clip.joints[index].end_site = end;
      lex.expect("}");
    } else {
      lex.error("expected JOINT, End or }, got '" + tok + "'");
    }
  }
}

}  // namespace detail

inline MotionClip parse_bvh(const std::string& text) {
  detail::BvhLexer lex(text);
  MotionClip clip;
  lex.expect("HIERARCHY");
  lex.expect("ROOT");
  detail::parse_bvh_joint(lex, clip, -1, lex.expect_token());
  lex.expect("MOTION");
  lex.expect("Frames:");
  clip.frame_count = static_cast<int>(lex.expect_number());
  lex.expect("Frame");
  lex.expect("Time:");
  clip.frame_time = lex.expect_number();
  if (clip.frame_time <= 0) lex.error("frame time must be positive");

  clip.channel_count = 0;
  for (const auto& j : clip.joints)
    clip.channel_count += static_cast<int>(j.channels.size());

  clip.values.reserve(static_cast<size_t>(clip.frame_count) * clip.channel_count);
  for (int f = 0; f < clip.frame_count; ++f)
    for (int c = 0; c < clip.channel_count; ++c) {
      auto tok = lex.next();
      if (!tok)
        fail(ErrorCode::ParseError, "bvh frame " + std::to_string(f) + ": expected " +
                                        std::to_string(clip.channel_count) +
                                        " values, got " + std::to_string(c));
      char* end = nullptr;
      const double v = std::strtod(tok->c_str(), &end);
      if (end != tok->c_str() + tok->size())
        fail(ErrorCode::ParseError,
             "bvh frame " + std::to_string(f) + ": bad value '" + *tok + "'");
      clip.values.push_back(v);
    }
  if (auto extra = lex.next())
    fail(ErrorCode::ParseError, "bvh: trailing data after frame " +
                                    std::to_string(clip.frame_count - 1) + ": '" + *extra + "'");
  return clip;
}

// Text form parses back to an identical clip; floats at 6 significant digits.
inline std::string serialize_bvh(const MotionClip& clip) {
  std::string out = "HIERARCHY\n";
  std::vector<std::vector<int>> children(clip.joints.size());
  for (int j = 0; j < static_cast<int>(clip.joints.size()); ++j)
    if (clip.joints[j].parent >= 0) children[clip.joints[j].parent].push_back(j);

  std::function<void(int, int)> emit = [&](int j, int depth) {
    const auto& joint = clip.joints[j];
    const std::string pad(static_cast<size_t>(depth) * 2, ' ');
    out += pad + (joint.parent < 0 ? "ROOT " : "JOINT ") + joint.name + "\n" + pad + "{\n";
    const std::string inner(static_cast<size_t>(depth + 1) * 2, ' ');
    out += inner + "OFFSET " + format_g6(joint.offset.x()) + " " +
           format_g6(joint.offset.y()) + " " + format_g6(joint.offset.z()) + "\n";
    out += inner + "CHANNELS " + std::to_string(joint.channels.size());
    for (const auto& c : joint.channels) out += " " + c;
    out += "\n";
    for (int child : children[j]) emit(child, depth + 1);
    if (joint.end_site) {
      out += inner + "End Site\n" + inner + "{\n";
      out += inner + "  OFFSET " + format_g6(joint.end_site->x()) + " " +
             format_g6(joint.end_site->y()) + " " + format_g6(joint.end_site->z()) + "\n";
      out += inner + "}\n";
    }
    out += pad + "}\n";
  };
  emit(0, 0);

  out += "MOTION\nFrames: " + std::to_string(clip.frame_count) + "\n";
  out += "Frame Time: " + format_g6(clip.frame_time) + "\n";
  for (int f = 0; f < clip.frame_count; ++f) {
    for (int c = 0; c < clip.channel_count; ++c) {
      if (c) out += " ";
      out += format_g6(clip.value(f, c));
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------- retarget

struct RetargetEntry {
  int model_joint = 0;
  Mat3 axis_correction = Mat3::Identity();  // signed permutation
};

struct RetargetMap {
  int model_joint_count = 0;
  std::map<std::string, RetargetEntry> joints;  // source joint name keyed
  double translation_scale = 1.0;
};

inline void validate_retarget_map(const RetargetMap& map) {
  std::vector<int> seen;
  for (const auto& [name, entry] : map.joints) {
    require(entry.model_joint >= 0 && entry.model_joint < map.model_joint_count,
            ErrorCode::OutOfRange, "retarget target out of range for '" + name + "'");
    for (int s : seen)
      require(s != entry.model_joint, ErrorCode::InvalidArgument,
              "retarget targets must be unique; joint " + std::to_string(entry.model_joint) +
                  " mapped twice");
    seen.push_back(entry.model_joint);
  }
}

// JSON: {"model_joints": J, "translation_scale": s,
//        "joints": {"Hips": {"index": 0, "axis_map": ["x","-y","z"]}, ...}}
inline RetargetMap load_retarget_map(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  RetargetMap map;
  map.model_joint_count = j.at("model_joints").get<int>();
  map.translation_scale = j.value("translation_scale", 1.0);
  for (const auto& [name, spec] : j.at("joints").items()) {
    RetargetEntry entry;
    entry.model_joint = spec.at("index").get<int>();
    if (spec.contains("axis_map")) {
      const auto axes = spec.at("axis_map").get<std::vector<std::string>>();
      require(axes.size() == 3, ErrorCode::ParseError, "axis_map needs 3 entries");
      entry.axis_correction = Mat3::Zero();
      for (int row = 0; row < 3; ++row) {
        std::string a = axes[row];
        double sign = 1.0;
        if (!a.empty() && (a[0] == '-' || a[0] == '+')) {
          sign = a[0] == '-' ? -1.0 : 1.0;
          a = a.substr(1);
        }
        require(a == "x" || a == "y" || a == "z", ErrorCode::ParseError,
                "axis_map entry must be one of x, y, z");
        entry.axis_correction(row, a[0] - 'x') = sign;
      }
    }
    map.joints[name] = entry;
  }
  validate_retarget_map(map);
  return map;
}

// Rotation of one source joint at one frame: file-order intrinsic Euler,
// angles in degrees.
inline Mat3 bvh_joint_rotation(const MotionClip& clip, int joint, int frame) {
  const int base = clip.channel_offset(joint);
  Mat3 r = Mat3::Identity();
  for (size_t c = 0; c < clip.joints[joint].channels.size(); ++c) {
    const std::string& ch = clip.joints[joint].channels[c];
    if (!detail::is_rotation_channel(ch)) continue;
    const double rad = clip.value(frame, base + static_cast<int>(c)) * M_PI / 180.0;
    const Vec3 axis = ch[0] == 'X' ? Vec3::UnitX() : ch[0] == 'Y' ? Vec3::UnitY() : Vec3::UnitZ();
    r = r * Eigen::AngleAxisd(rad, axis).toRotationMatrix();
  }
  return r;
}

inline PoseParams retarget(const MotionClip& clip, int frame_index, const RetargetMap& map) {
  require(frame_index >= 0 && frame_index < clip.frame_count, ErrorCode::OutOfRange,
          "frame " + std::to_string(frame_index) + " out of range (clip has " +
              std::to_string(clip.frame_count) + ")");
  PoseParams pose;
  pose.joint_rotations.assign(map.model_joint_count, Vec3::Zero());

  for (int j = 0; j < static_cast<int>(clip.joints.size()); ++j) {
    const auto it = map.joints.find(clip.joints[j].name);
    if (it == map.joints.end()) continue;
    const Mat3& s = it->second.axis_correction;
    const Mat3 r = s * bvh_joint_rotation(clip, j, frame_index) * s.transpose();
    Eigen::AngleAxisd aa(r);
    pose.joint_rotations[it->second.model_joint] = aa.axis() * aa.angle();

    if (clip.joints[j].parent == -1) {
      const int base = clip.channel_offset(j);
      Vec3 t = Vec3::Zero();
      for (size_t c = 0; c < clip.joints[j].channels.size(); ++c) {
        const std::string& ch = clip.joints[j].channels[c];
        if (detail::is_position_channel(ch))
          t[ch[0] - 'X'] = clip.value(frame_index, base + static_cast<int>(c));
      }
      pose.root_translation = s * t * map.translation_scale;
    }
  }
  return pose;
}

// ---------------------------------------------------------------- sampling

// Spherical interpolation between bracketing frames; translation lerped;
// t clamped to the sequence.
inline PoseParams sample_pose(const std::vector<PoseParams>& sequence, double t_seconds,
                              double frame_time) {
  require(!sequence.empty(), ErrorCode::EmptyInput, "empty pose sequence");
  require(frame_time > 0, ErrorCode::InvalidArgument, "frame_time must be positive");
  const double ft = t_seconds / frame_time;
  if (ft <= 0) return sequence.front();
  if (ft >= static_cast<double>(sequence.size() - 1)) return sequence.back();
  const int k = static_cast<int>(std::floor(ft));
  const double a = ft - k;
  if (a == 0.0) return sequence[k];

  const PoseParams& p0 = sequence[k];
  const PoseParams& p1 = sequence[k + 1];
  PoseParams out;
  out.joint_rotations.resize(p0.joint_rotations.size());
  for (size_t j = 0; j < p0.joint_rotations.size(); ++j) {
    const Quat q0(rodrigues(p0.joint_rotations[j]));
    const Quat q1(rodrigues(p1.joint_rotations[j]));
    Quat q = q0.slerp(a, q1);
    q.normalize();
    Eigen::AngleAxisd aa(q);
    out.joint_rotations[j] = aa.axis() * aa.angle();
  }
  out.root_translation = (1.0 - a) * p0.root_translation + a * p1.root_translation;
  return out;
}

}  // namespace corrgen
