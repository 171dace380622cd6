#pragma once

#include "corrgen/common.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace corrgen {

// Parametric articulated body. Plain data; all deformation ops are free
// functions and leave the model untouched.
struct BodyModel {
  std::vector<Vec3> template_vertices;
  std::vector<std::array<int, 3>> faces;
  int shape_dim = 0;                    // K
  std::vector<double> shape_dirs;       // [V][3][K] row-major
  int pose_dim = 0;                     // P = 9*(J-1), 0 when absent
  std::vector<double> pose_dirs;        // [V][3][P] row-major
  std::vector<double> joint_regressor;  // [J][V] row-major, rows sum to 1
  std::vector<double> skin_weights;     // [V][J] row-major, rows sum to 1
  std::vector<int> parents;             // parent per joint, root = -1
  std::vector<std::string> joint_names;
  std::string gender_tag = "neutral";

  int vertex_count() const { return static_cast<int>(template_vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
  int joint_count() const { return static_cast<int>(parents.size()); }

  double weight(int vertex, int joint) const {
    return skin_weights[static_cast<size_t>(vertex) * parents.size() + joint];
  }
};

struct ShapeParams {
  Eigen::VectorXd beta;
};

struct PoseParams {
  std::vector<Vec3> joint_rotations;  // axis-angle, radians
  Vec3 root_translation = Vec3::Zero();
};

struct PosedMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> normals;
};

// ---------------------------------------------------------------- validation

inline void validate_body_model(const BodyModel& m) {
  const int v_count = m.vertex_count();
  const int j_count = m.joint_count();
  require(v_count > 0, ErrorCode::DimensionMismatch, "model has no vertices");
  require(j_count > 0, ErrorCode::DimensionMismatch, "model has no joints");
  require(m.skin_weights.size() == static_cast<size_t>(v_count) * j_count,
          ErrorCode::DimensionMismatch, "skin_weights size != V*J");
  require(m.joint_regressor.size() == static_cast<size_t>(j_count) * v_count,
          ErrorCode::DimensionMismatch, "joint_regressor size != J*V");
  require(m.shape_dirs.size() == static_cast<size_t>(v_count) * 3 * m.shape_dim,
          ErrorCode::DimensionMismatch, "shape_dirs size != V*3*K");
  require(m.pose_dirs.size() == static_cast<size_t>(v_count) * 3 * m.pose_dim,
          ErrorCode::DimensionMismatch, "pose_dirs size != V*3*P");
  if (m.pose_dim > 0)
    require(m.pose_dim == 9 * (j_count - 1), ErrorCode::DimensionMismatch,
            "pose_dims must equal 9*(J-1)");
  if (!m.joint_names.empty())
    require(static_cast<int>(m.joint_names.size()) == j_count,
            ErrorCode::DimensionMismatch, "joint_names length != J");

  for (const auto& f : m.faces)
    for (int idx : f)
      require(idx >= 0 && idx < v_count, ErrorCode::DimensionMismatch,
              "face index out of range: " + std::to_string(idx));

  for (int v = 0; v < v_count; ++v) {
    double sum = 0;
    for (int j = 0; j < j_count; ++j) {
      const double w = m.weight(v, j);
      require(w >= -1e-12, ErrorCode::WeightsNotNormalized,
              "weights not normalized: negative weight at vertex " + std::to_string(v));
      sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::WeightsNotNormalized,
            "weights not normalized: row " + std::to_string(v) + " sums to " +
                std::to_string(sum));
  }

  for (int j = 0; j < j_count; ++j) {
    double sum = 0;
    for (int v = 0; v < v_count; ++v)
      sum += m.joint_regressor[static_cast<size_t>(j) * v_count + v];
    require(std::abs(sum - 1.0) <= 1e-5, ErrorCode::RegressorNotNormalized,
            "regressor row " + std::to_string(j) + " sums to " + std::to_string(sum));
  }

  // Single rooted tree: exactly one -1 parent, every walk terminates at it.
  int roots = 0;
  for (int j = 0; j < j_count; ++j) {
    if (m.parents[j] == -1) {
      ++roots;
      continue;
    }
    require(m.parents[j] >= 0 && m.parents[j] < j_count, ErrorCode::KinematicCycle,
            "kinematic cycle: parent index out of range at joint " + std::to_string(j));
  }
  require(roots == 1, ErrorCode::KinematicCycle,
          "kinematic cycle: tree must have exactly one root, found " + std::to_string(roots));
  for (int j = 0; j < j_count; ++j) {
    int cur = j, steps = 0;
    while (cur != -1) {
      cur = m.parents[cur];
      require(++steps <= j_count, ErrorCode::KinematicCycle,
              "kinematic cycle detected at joint " + std::to_string(j));
    }
  }
}

// ---------------------------------------------------------------- container

// Container layout: a directory holding model.json plus raw little-endian
// float32 arrays, row-major. See docs/formats.md.
inline void save_body_model(const fs::path& dir, const BodyModel& m) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["format"] = "corrgen-body-model";
  j["version"] = 1;
  j["gender_tag"] = m.gender_tag;
  j["vertices"] = m.vertex_count();
  j["faces"] = m.face_count();
  j["joints"] = m.joint_count();
  j["shape_dims"] = m.shape_dim;
  j["pose_dims"] = m.pose_dim;
  j["parents"] = m.parents;
  j["joint_names"] = m.joint_names;
  auto faces = nlohmann::json::array();
  for (const auto& f : m.faces) faces.push_back({f[0], f[1], f[2]});
  j["faces_data"] = std::move(faces);
  j["arrays"] = {{"template", "template.f32"},
                 {"shape_dirs", "shape_dirs.f32"},
                 {"joint_regressor", "joint_regressor.f32"},
                 {"skin_weights", "skin_weights.f32"}};
  if (m.pose_dim > 0) j["arrays"]["pose_dirs"] = "pose_dirs.f32";

  auto write_doubles = [&](const char* name, const std::vector<double>& src) {
    std::vector<float> f(src.begin(), src.end());
    write_f32_array(dir / name, f.data(), f.size());
  };
  std::vector<double> tmpl(m.vertex_count() * 3);
  for (int v = 0; v < m.vertex_count(); ++v)
    for (int c = 0; c < 3; ++c) tmpl[v * 3 + c] = m.template_vertices[v][c];
  write_doubles("template.f32", tmpl);
  write_doubles("shape_dirs.f32", m.shape_dirs);
  if (m.pose_dim > 0) write_doubles("pose_dirs.f32", m.pose_dirs);
  write_doubles("joint_regressor.f32", m.joint_regressor);
  write_doubles("skin_weights.f32", m.skin_weights);
  write_text_file(dir / "model.json", j.dump(2) + "\n");
}

inline BodyModel load_body_model(const fs::path& dir) {
  const fs::path manifest = dir / "model.json";
  require(fs::exists(manifest), ErrorCode::MissingFile, manifest.string() + " not found");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, manifest.string() + ": " + e.what());
  }

  BodyModel m;
  try {
    const int v_count = j.at("vertices").get<int>();
    const int f_count = j.at("faces").get<int>();
    const int j_count = j.at("joints").get<int>();
    m.shape_dim = j.at("shape_dims").get<int>();
    m.pose_dim = j.value("pose_dims", 0);
    m.gender_tag = j.value("gender_tag", "neutral");
    m.parents = j.at("parents").get<std::vector<int>>();
    if (j.contains("joint_names"))
      m.joint_names = j.at("joint_names").get<std::vector<std::string>>();
    require(static_cast<int>(m.parents.size()) == j_count, ErrorCode::DimensionMismatch,
            "parents length != joints");
    const auto& faces = j.at("faces_data");
    require(static_cast<int>(faces.size()) == f_count, ErrorCode::DimensionMismatch,
            "faces_data length != faces");
    m.faces.reserve(f_count);
    for (const auto& f : faces)
      m.faces.push_back({f.at(0).get<int>(), f.at(1).get<int>(), f.at(2).get<int>()});

    const auto& arrays = j.at("arrays");
    auto load_array = [&](const char* key, size_t count) {
      const std::string file = arrays.at(key).get<std::string>();
      auto f = read_f32_array(dir / file, count);
      return std::vector<double>(f.begin(), f.end());
    };
    auto tmpl = load_array("template", static_cast<size_t>(v_count) * 3);
    m.template_vertices.resize(v_count);
    for (int v = 0; v < v_count; ++v)
      m.template_vertices[v] = Vec3(tmpl[v * 3], tmpl[v * 3 + 1], tmpl[v * 3 + 2]);
    m.shape_dirs = load_array("shape_dirs", static_cast<size_t>(v_count) * 3 * m.shape_dim);
    if (m.pose_dim > 0)
      m.pose_dirs = load_array("pose_dirs", static_cast<size_t>(v_count) * 3 * m.pose_dim);
    m.joint_regressor =
        load_array("joint_regressor", static_cast<size_t>(j_count) * v_count);
    m.skin_weights = load_array("skin_weights", static_cast<size_t>(v_count) * j_count);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, manifest.string() + ": " + e.what());
  }

  validate_body_model(m);
  return m;
}

// ---------------------------------------------------------------- deformation

inline Mat3 rodrigues(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-12) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

// Wraps every joint rotation to axis-angle magnitude in [0, pi].
inline PoseParams canonicalize(const PoseParams& pose) {
  PoseParams out = pose;
  for (auto& r : out.joint_rotations) {
    const double angle = r.norm();
    if (angle < 1e-12) {
      r = Vec3::Zero();
      continue;
    }
    Eigen::AngleAxisd aa(Quat(Eigen::AngleAxisd(angle, r / angle)));
    r = aa.axis() * aa.angle();
  }
  return out;
}

inline std::vector<Vec3> apply_shape(const BodyModel& m, const ShapeParams& shape) {
  require(shape.beta.size() == m.shape_dim, ErrorCode::DimensionMismatch,
          "beta length " + std::to_string(shape.beta.size()) + " != shape_dims " +
              std::to_string(m.shape_dim));
  std::vector<Vec3> out = m.template_vertices;
  const int K = m.shape_dim;
  for (int v = 0; v < m.vertex_count(); ++v)
    for (int c = 0; c < 3; ++c) {
      const double* row = &m.shape_dirs[(static_cast<size_t>(v) * 3 + c) * K];
      double d = 0;
      for (int k = 0; k < K; ++k) d += row[k] * shape.beta[k];
      out[v][c] += d;
    }
  return out;
}

struct JointTransforms {
  std::vector<Mat4> world;       // posed global transform per joint
  std::vector<Mat4> skin;        // world * rest^-1, applied to rest-space points
  std::vector<Vec3> rest_joints; // regressed from the shaped template
};

inline std::vector<Vec3> regress_joints(const BodyModel& m,
                                        const std::vector<Vec3>& vertices) {
  const int v_count = m.vertex_count();
  std::vector<Vec3> joints(m.joint_count(), Vec3::Zero());
  for (int j = 0; j < m.joint_count(); ++j) {
    const double* row = &m.joint_regressor[static_cast<size_t>(j) * v_count];
    Vec3 acc = Vec3::Zero();
    for (int v = 0; v < v_count; ++v) acc += row[v] * vertices[v];
    joints[j] = acc;
  }
  return joints;
}

inline JointTransforms forward_kinematics(const BodyModel& m,
                                          const std::vector<Vec3>& shaped_vertices,
                                          const PoseParams& pose) {
  const int j_count = m.joint_count();
  require(static_cast<int>(pose.joint_rotations.size()) == j_count,
          ErrorCode::DimensionMismatch, "pose joint count mismatch");

  JointTransforms out;
  out.rest_joints = regress_joints(m, shaped_vertices);
  out.world.resize(j_count);
  out.skin.resize(j_count);

  for (int j = 0; j < j_count; ++j) {
    const Mat3 rot = rodrigues(pose.joint_rotations[j]);
    Mat4 local = Mat4::Identity();
    local.topLeftCorner<3, 3>() = rot;
    const int p = m.parents[j];
    if (p == -1) {
      local.topRightCorner<3, 1>() = out.rest_joints[j] + pose.root_translation;
      out.world[j] = local;
    } else {
      local.topRightCorner<3, 1>() = out.rest_joints[j] - out.rest_joints[p];
      out.world[j] = out.world[p] * local;
    }
    Mat4 rest_inv = Mat4::Identity();
    rest_inv.topRightCorner<3, 1>() = -out.rest_joints[j];
    out.skin[j] = out.world[j] * rest_inv;
  }
  return out;
}

inline std::vector<Vec3> compute_vertex_normals(const std::vector<Vec3>& vertices,
                                                const std::vector<std::array<int, 3>>& faces) {
  std::vector<Vec3> normals(vertices.size(), Vec3::Zero());
  for (const auto& f : faces) {
    // cross product length is twice the face area, which gives area weighting
    const Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
    normals[f[0]] += n;
    normals[f[1]] += n;
    normals[f[2]] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    n = len > 1e-20 ? Vec3(n / len) : Vec3(0, 0, 1);
  }
  return normals;
}

// Pose-corrective displacement: pose_dirs * vec(R(theta) - I), non-root joints.
inline std::vector<Vec3> apply_pose_dirs(const BodyModel& m,
                                         const std::vector<Vec3>& shaped,
                                         const PoseParams& pose) {
  if (m.pose_dim == 0) return shaped;
  const int P = m.pose_dim;
  Eigen::VectorXd feat(P);
  for (int j = 1; j < m.joint_count(); ++j) {
    const Mat3 d = rodrigues(pose.joint_rotations[j]) - Mat3::Identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) feat[(j - 1) * 9 + r * 3 + c] = d(r, c);
  }
  std::vector<Vec3> out = shaped;
  for (int v = 0; v < m.vertex_count(); ++v)
    for (int c = 0; c < 3; ++c) {
      const double* row = &m.pose_dirs[(static_cast<size_t>(v) * 3 + c) * P];
      double disp = 0;
      for (int k = 0; k < P; ++k) disp += row[k] * feat[k];
      out[v][c] += disp;
    }
  return out;
}

inline PosedMesh lbs_skin(const BodyModel& m, const std::vector<Vec3>& shaped_vertices,
                          const JointTransforms& transforms, const PoseParams& pose) {
  const int v_count = m.vertex_count();
  const int j_count = m.joint_count();
  const std::vector<Vec3> rest = apply_pose_dirs(m, shaped_vertices, pose);

  PosedMesh mesh;
  mesh.faces = m.faces;
  mesh.vertices.resize(v_count);
  for (int v = 0; v < v_count; ++v) {
    Mat4 blended = Mat4::Zero();
    for (int j = 0; j < j_count; ++j) {
      const double w = m.weight(v, j);
      if (w != 0.0) blended += w * transforms.skin[j];
    }
    const Vec4 h = blended * rest[v].homogeneous();
    mesh.vertices[v] = h.head<3>() / h[3];
  }
  mesh.normals = compute_vertex_normals(mesh.vertices, mesh.faces);
  return mesh;
}

// ---------------------------------------------------------------- toy biped

// Bone of the capsule skeleton behind the toy biped: a segment, a radius,
// and the pair of surface charts (towards +z / -z) its faces map to.
struct ToyBone {
  std::string name;
  int joint;        // joint index the bone hangs off
  Vec3 a, b;        // segment endpoints, meters
  double radius;
  int chart_pos, chart_neg;
};

inline std::vector<ToyBone> toy_biped_bones(double radius) {
  const double r = radius;
  std::vector<ToyBone> bones;
  auto add = [&](const char* name, int joint, Vec3 a, Vec3 b, double br, int cp, int cn) {
    bones.push_back(ToyBone{name, joint, a, b, br, cp, cn});
  };
  // Chart ids follow the DensePose atlas numbering (see data/chart_to_part.json).
  add("pelvis", 0, {-0.05, 0.95, 0}, {0.05, 0.95, 0}, 1.5 * r, 1, 2);
  add("torso", 1, {0, 1.05, 0}, {0, 1.42, 0}, 1.6 * r, 1, 2);
  add("head", 2, {0, 1.50, 0}, {0, 1.60, 0}, 1.3 * r, 23, 24);
  add("l_upper_arm", 3, {0.17, 1.38, 0}, {0.40, 1.38, 0}, 0.75 * r, 15, 17);
  add("l_lower_arm", 4, {0.40, 1.38, 0}, {0.62, 1.38, 0}, 0.65 * r, 19, 21);
  add("r_upper_arm", 5, {-0.17, 1.38, 0}, {-0.40, 1.38, 0}, 0.75 * r, 16, 18);
  add("r_lower_arm", 6, {-0.40, 1.38, 0}, {-0.62, 1.38, 0}, 0.65 * r, 20, 22);
  add("l_upper_leg", 7, {0.11, 0.92, 0}, {0.11, 0.52, 0}, 0.8 * r, 8, 10);
  add("l_lower_leg", 8, {0.11, 0.52, 0}, {0.11, 0.10, 0}, 0.7 * r, 12, 14);
  add("r_upper_leg", 9, {-0.11, 0.92, 0}, {-0.11, 0.52, 0}, 0.8 * r, 7, 9);
  add("r_lower_leg", 10, {-0.11, 0.52, 0}, {-0.11, 0.10, 0}, 0.7 * r, 11, 13);
  return bones;
}

inline std::vector<int> toy_biped_parents() {
  return {-1, 0, 1, 1, 3, 1, 5, 0, 7, 0, 9};
}

inline std::vector<std::string> toy_biped_joint_names() {
  return {"pelvis", "spine", "head", "l_shoulder", "l_elbow",
          "r_shoulder", "r_elbow", "l_hip", "l_knee", "r_hip", "r_knee"};
}

namespace detail {

inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

inline double smooth_min(double a, double b, double k) {
  const double h = std::clamp(0.5 + 0.5 * (b - a) / k, 0.0, 1.0);
  return b * (1 - h) + a * h - k * h * (1 - h);
}

inline double biped_sdf(const std::vector<ToyBone>& bones, const Vec3& p) {
  double d = kInf;
  for (const auto& bone : bones) {
    const double cap = point_segment_distance(p, bone.a, bone.b) - bone.radius;
    d = (d == kInf) ? cap : smooth_min(d, cap, 0.015);
  }
  return d;
}

}  // namespace detail

// Capsule-skeleton biped extracted as a single closed surface via naive
// surface nets on the smooth-union SDF. Deterministic in its arguments.
// n_segments controls grid resolution (cells across ~3 radii).
inline BodyModel make_toy_biped(int n_segments, double radius) {
  require(n_segments >= 2, ErrorCode::InvalidArgument, "n_segments must be >= 2");
  require(radius > 0, ErrorCode::InvalidArgument, "radius must be positive");

  const auto bones = toy_biped_bones(radius);
  const double cell = 4.0 * radius / n_segments;

  Vec3 lo(kInf, kInf, kInf), hi(-kInf, -kInf, -kInf);
  for (const auto& b : bones) {
    for (const Vec3& e : {b.a, b.b}) {
      lo = lo.cwiseMin(e - Vec3::Constant(b.radius));
      hi = hi.cwiseMax(e + Vec3::Constant(b.radius));
    }
  }
  lo -= Vec3::Constant(3 * cell);
  hi += Vec3::Constant(3 * cell);
  const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / cell));
  const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / cell));
  const int nz = static_cast<int>(std::ceil((hi.z() - lo.z()) / cell));

  // Sample the field at lattice corners.
  auto sample_index = [&](int i, int j, int k) {
    return (static_cast<size_t>(k) * (ny + 1) + j) * (nx + 1) + i;
  };
  std::vector<double> field(static_cast<size_t>(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        const Vec3 p = lo + Vec3(i * cell, j * cell, k * cell);
        field[sample_index(i, j, k)] = detail::biped_sdf(bones, p);
      }

  // One vertex per cell containing a sign change: mean of edge crossings.
  std::vector<int> cell_vertex(static_cast<size_t>(nx) * ny * nz, -1);
  auto cell_index = [&](int i, int j, int k) {
    return (static_cast<size_t>(k) * ny + j) * static_cast<size_t>(nx) + i;
  };
  static const int corner_offsets[8][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                                           {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};
  static const int cell_edges[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                        {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  std::vector<Vec3> vertices;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double corner[8];
        Vec3 cpos[8];
        bool neg = false, pos = false;
        for (int c = 0; c < 8; ++c) {
          const int ci = i + corner_offsets[c][0];
          const int cj = j + corner_offsets[c][1];
          const int ck = k + corner_offsets[c][2];
          corner[c] = field[sample_index(ci, cj, ck)];
          cpos[c] = lo + Vec3(ci * cell, cj * cell, ck * cell);
          (corner[c] < 0 ? neg : pos) = true;
        }
        if (!neg || !pos) continue;
        Vec3 acc = Vec3::Zero();
        int crossings = 0;
        for (const auto& e : cell_edges) {
          const double f0 = corner[e[0]], f1 = corner[e[1]];
          if ((f0 < 0) == (f1 < 0)) continue;
          const double t = f0 / (f0 - f1);
          acc += cpos[e[0]] + t * (cpos[e[1]] - cpos[e[0]]);
          ++crossings;
        }
        cell_vertex[cell_index(i, j, k)] = static_cast<int>(vertices.size());
        vertices.push_back(acc / crossings);
      }

  // Quad per sign-changing lattice edge, wound so normals point outward
  // (towards the positive side of the field).
  std::vector<std::array<int, 3>> faces;
  auto emit_quad = [&](int a, int b, int c, int d, bool flip) {
    if (a < 0 || b < 0 || c < 0 || d < 0) return;
    if (flip) {
      faces.push_back({a, c, b});
      faces.push_back({a, d, c});
    } else {
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        // Base winding of each quad faces +axis; keep it when the inside
        // (negative field) sits at the low end of the edge.
        const double f0 = field[sample_index(i, j, k)];
        if (j > 0 && k > 0) {  // +x edge
          const double f1 = field[sample_index(i + 1, j, k)];
          if ((f0 < 0) != (f1 < 0))
            emit_quad(cell_vertex[cell_index(i, j - 1, k - 1)],
                      cell_vertex[cell_index(i, j, k - 1)],
                      cell_vertex[cell_index(i, j, k)],
                      cell_vertex[cell_index(i, j - 1, k)], f0 >= 0);
        }
        if (i > 0 && k > 0) {  // +y edge
          const double f1 = field[sample_index(i, j + 1, k)];
          if ((f0 < 0) != (f1 < 0))
            emit_quad(cell_vertex[cell_index(i - 1, j, k - 1)],
                      cell_vertex[cell_index(i - 1, j, k)],
                      cell_vertex[cell_index(i, j, k)],
                      cell_vertex[cell_index(i, j, k - 1)], f0 >= 0);
        }
        if (i > 0 && j > 0) {  // +z edge
          const double f1 = field[sample_index(i, j, k + 1)];
          if ((f0 < 0) != (f1 < 0))
            emit_quad(cell_vertex[cell_index(i - 1, j - 1, k)],
                      cell_vertex[cell_index(i, j - 1, k)],
                      cell_vertex[cell_index(i, j, k)],
                      cell_vertex[cell_index(i - 1, j, k)], f0 >= 0);
        }
      }

  BodyModel m;
  m.template_vertices = std::move(vertices);
  m.faces = std::move(faces);
  m.parents = toy_biped_parents();
  m.joint_names = toy_biped_joint_names();
  m.gender_tag = "neutral";
  const int v_count = m.vertex_count();
  const int j_count = m.joint_count();

  // Skin weights: gaussian falloff to the bone segments, top-4 support.
  const double sigma_w = 0.6 * radius;
  m.skin_weights.assign(static_cast<size_t>(v_count) * j_count, 0.0);
  for (int v = 0; v < v_count; ++v) {
    const Vec3& p = m.template_vertices[v];
    std::vector<std::pair<double, int>> cand;
    cand.reserve(bones.size());
    for (const auto& bone : bones) {
      const double d = detail::point_segment_distance(p, bone.a, bone.b) - bone.radius;
      const double w = std::exp(-(d / sigma_w) * (d / sigma_w));
      cand.push_back({w, bone.joint});
    }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    cand.resize(std::min<size_t>(4, cand.size()));
    double sum = 0;
    for (const auto& [w, joint] : cand) sum += w;
    for (const auto& [w, joint] : cand)
      m.skin_weights[static_cast<size_t>(v) * j_count + joint] += w / sum;
  }

  // Joint regressor: gaussian over vertex distance to the designed joint spot.
  std::vector<Vec3> joint_pos(j_count);
  for (const auto& bone : bones) joint_pos[bone.joint] = bone.a;
  const double sigma_r = 1.2 * radius;
  m.joint_regressor.assign(static_cast<size_t>(j_count) * v_count, 0.0);
  for (int j = 0; j < j_count; ++j) {
    double sum = 0;
    for (int v = 0; v < v_count; ++v) {
      const double d = (m.template_vertices[v] - joint_pos[j]).norm();
      const double w = std::exp(-(d / sigma_r) * (d / sigma_r));
      m.joint_regressor[static_cast<size_t>(j) * v_count + v] = w;
      sum += w;
    }
    for (int v = 0; v < v_count; ++v)
      m.joint_regressor[static_cast<size_t>(j) * v_count + v] /= sum;
  }

  // Eight fixed smooth displacement bases.
  m.shape_dim = 8;
  m.shape_dirs.assign(static_cast<size_t>(v_count) * 3 * 8, 0.0);
  const Vec3 center(0, 0.9, 0);
  struct Basis {
    Vec3 freq, axis;
    double phase, amp;
  };
  static const Basis bases[6] = {
      {{2.1, 0.7, 1.3}, {1, 0, 0}, 0.0, 0.015},
      {{0.5, 2.9, 0.8}, {0, 1, 0}, 1.1, 0.015},
      {{1.7, 1.1, 2.3}, {0, 0, 1}, 2.3, 0.015},
      {{3.1, 0.4, 0.9}, {0.7071067811865476, 0.7071067811865476, 0}, 0.7, 0.012},
      {{0.9, 1.9, 1.5}, {0, 0.7071067811865476, 0.7071067811865476}, 1.9, 0.012},
      {{2.5, 2.5, 0.3}, {0.7071067811865476, 0, 0.7071067811865476}, 3.0, 0.012},
  };
  for (int v = 0; v < v_count; ++v) {
    const Vec3& p = m.template_vertices[v];
    auto dir = [&](int c, int k) -> double& {
      return m.shape_dirs[(static_cast<size_t>(v) * 3 + c) * 8 + k];
    };
    for (int c = 0; c < 3; ++c) {
      dir(c, 0) = 0.05 * (p[c] - center[c]);               // overall scale
      dir(c, 1) = (c == 1) ? 0.08 * (p.y() - center.y()) : 0.0;  // height
    }
    for (int k = 0; k < 6; ++k) {
      const double s = bases[k].amp * std::sin(p.dot(bases[k].freq) + bases[k].phase);
      for (int c = 0; c < 3; ++c) dir(c, k + 2) = s * bases[k].axis[c];
    }
  }

  validate_body_model(m);
  return m;
}

}  // namespace corrgen
