#pragma once

#include "corrgen/common.hpp"
#include "corrgen/image.hpp"

#include <optional>
#include <vector>

namespace corrgen {

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
};

struct CameraModel {
  double fx = 500, fy = 500;   // pixels
  double cx = 320, cy = 240;   // pixels
  int width = 640, height = 480;
  double k1 = 0, k2 = 0;       // radial distortion
  double p1 = 0, p2 = 0;       // tangential distortion
  Eigen::Isometry3d world_from_camera = Eigen::Isometry3d::Identity();
  double near_clip = 0.01, far_clip = 100.0;

  Vec3 position() const { return world_from_camera.translation(); }
};

struct NoiseModel {
  double gaussian_sigma = 0.0;   // intensity units on the [0,1] scale
  std::string seed_policy = "per_frame";
};

struct CameraRig {
  std::vector<CameraModel> cameras;
  std::vector<NoiseModel> noise;  // parallel to cameras
};

// OpenCV-style frame: x right, y down, z forward.
inline Eigen::Isometry3d look_at_pose(const Vec3& position, const Vec3& target,
                                      const Vec3& up = Vec3(0, 1, 0)) {
  Vec3 z = (target - position).normalized();
  Vec3 x = (-up).cross(z);
  if (x.norm() < 1e-9) x = Vec3(1, 0, 0).cross(z);  // looking straight up/down
  x.normalize();
  const Vec3 y = z.cross(x);
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.linear().col(0) = x;
  pose.linear().col(1) = y;
  pose.linear().col(2) = z;
  pose.translation() = position;
  return pose;
}

inline void validate_camera(const CameraModel& c) {
  require(c.fx > 0 && c.fy > 0, ErrorCode::InvalidArgument, "focal lengths must be positive");
  require(c.width >= 1 && c.height >= 1, ErrorCode::InvalidArgument, "image size must be >= 1");
  require(c.near_clip > 0 && c.near_clip < c.far_clip, ErrorCode::InvalidArgument,
          "need 0 < near < far");
}

// ---------------------------------------------------------------- distortion

// Brown-Conrady forward model on normalized coordinates.
inline Vec2 distort_normalized(const CameraModel& c, const Vec2& p) {
  const double x = p.x(), y = p.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + c.k1 * r2 + c.k2 * r2 * r2;
  return Vec2(x * radial + 2.0 * c.p1 * x * y + c.p2 * (r2 + 2.0 * x * x),
              y * radial + c.p1 * (r2 + 2.0 * y * y) + 2.0 * c.p2 * x * y);
}

// Inverse of distort_normalized by Newton fixed-point iteration,
// <= 20 iterations, tolerance 1e-10. Throws on divergence.
inline Vec2 undistort_normalized(const CameraModel& c, const Vec2& distorted) {
  Vec2 x = distorted;
  for (int iter = 0; iter < 20; ++iter) {
    const double px = x.x(), py = x.y();
    const double r2 = px * px + py * py;
    const double radial = 1.0 + c.k1 * r2 + c.k2 * r2 * r2;
    const double dradial = c.k1 + 2.0 * c.k2 * r2;  // d(radial)/d(r2) terms folded below
    Eigen::Matrix2d jac;
    jac(0, 0) = radial + 2.0 * px * px * dradial + 2.0 * c.p1 * py + 6.0 * c.p2 * px;
    jac(0, 1) = 2.0 * px * py * dradial + 2.0 * c.p1 * px + 2.0 * c.p2 * py;
    jac(1, 0) = jac(0, 1);
    jac(1, 1) = radial + 2.0 * py * py * dradial + 6.0 * c.p1 * py + 2.0 * c.p2 * px;
    const Vec2 err = distort_normalized(c, x) - distorted;
    const double det = jac(0, 0) * jac(1, 1) - jac(0, 1) * jac(1, 0);
    if (!std::isfinite(det) || std::abs(det) < 1e-14) break;
    Vec2 step;
    step.x() = (jac(1, 1) * err.x() - jac(0, 1) * err.y()) / det;
    step.y() = (jac(0, 0) * err.y() - jac(1, 0) * err.x()) / det;
    x -= step;
    if (!x.allFinite() || x.norm() > 10.0) break;
    if (step.cwiseAbs().maxCoeff() < 1e-10) return x;
  }
  fail(ErrorCode::UndistortDivergence,
       "undistortion did not converge at normalized (" + format_g6(distorted.x()) + ", " +
           format_g6(distorted.y()) + ")");
}

// ---------------------------------------------------------------- projection

struct Projection {
  Vec2 pixel;
  double depth;  // camera-frame z, meters
};

inline std::optional<Projection> project_full(const CameraModel& c, const Vec3& world_point) {
  const Vec3 p = c.world_from_camera.inverse() * world_point;
  if (p.z() <= c.near_clip) return std::nullopt;
  const Vec2 d = distort_normalized(c, Vec2(p.x() / p.z(), p.y() / p.z()));
  return Projection{Vec2(c.fx * d.x() + c.cx, c.fy * d.y() + c.cy), p.z()};
}

inline std::optional<Vec2> project(const CameraModel& c, const Vec3& world_point) {
  const auto p = project_full(c, world_point);
  if (!p) return std::nullopt;
  return p->pixel;
}

inline bool pixel_in_bounds(const CameraModel& c, const Vec2& pixel) {
  return pixel.x() >= 0 && pixel.x() < c.width && pixel.y() >= 0 && pixel.y() < c.height;
}

// World-space viewing ray through a continuous pixel coordinate.
inline Ray pixel_ray(const CameraModel& c, const Vec2& pixel) {
  const Vec2 distorted((pixel.x() - c.cx) / c.fx, (pixel.y() - c.cy) / c.fy);
  const Vec2 n = undistort_normalized(c, distorted);
  const Vec3 dir_cam = Vec3(n.x(), n.y(), 1.0).normalized();
  return Ray{c.position(), c.world_from_camera.linear() * dir_cam};
}

// ---------------------------------------------------------------- sensor noise

// I.i.d. additive Gaussian per channel, clamped to [0,1].
inline ImageF add_sensor_noise(const ImageF& image, const NoiseModel& noise,
                               std::uint64_t seed) {
  if (noise.gaussian_sigma <= 0.0) return image;
  ImageF out = image;
  Rng rng(hash_tag(seed, "sensor_noise"));
  for (auto& v : out.px)
    v = static_cast<float>(clamp01(v + noise.gaussian_sigma * rng.normal()));
  return out;
}

}  // namespace corrgen
