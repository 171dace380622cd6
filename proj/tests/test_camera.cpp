#include <catch2/catch_amalgamated.hpp>

#include "corrgen/camera.hpp"

using namespace corrgen;

namespace {

CameraModel random_camera(Rng& rng, bool with_distortion) {
  CameraModel c;
  c.fx = rng.uniform(400, 900);
  c.fy = c.fx * rng.uniform(0.98, 1.02);
  c.cx = 320 + rng.uniform(-10, 10);
  c.cy = 240 + rng.uniform(-10, 10);
  c.width = 640;
  c.height = 480;
  if (with_distortion) {
    c.k1 = rng.uniform(-0.25, 0.1);
    c.k2 = rng.uniform(-0.02, 0.02);
    c.p1 = rng.uniform(-0.002, 0.002);
    c.p2 = rng.uniform(-0.002, 0.002);
  }
  const double yaw = rng.uniform(-M_PI, M_PI);
  const Vec3 pos(3.5 * std::sin(yaw), rng.uniform(0.5, 2.0), 3.5 * std::cos(yaw));
  c.world_from_camera = look_at_pose(pos, Vec3(0, 1, 0));
  return c;
}

}  // namespace

TEST_CASE("projection basics", "[camera]") {
  CameraModel c;  // identity extrinsics, fx=fy=500, cx=320, cy=240

  SECTION("points on the optical axis land on the principal point") {
    c.k1 = -0.3;
    c.k2 = 0.1;
    c.p1 = 0.01;
    const auto px = project(c, Vec3(0, 0, 2.0));
    REQUIRE(px.has_value());
    CHECK(px->x() == Catch::Approx(c.cx).margin(1e-12));
    CHECK(px->y() == Catch::Approx(c.cy).margin(1e-12));
  }

  SECTION("similar triangles with no distortion") {
    const auto px = project(c, Vec3(0.1, 0, 1.0));
    REQUIRE(px.has_value());
    CHECK(px->x() == Catch::Approx(370.0).margin(1e-12));
    CHECK(px->y() == Catch::Approx(c.cy).margin(1e-12));
  }

  SECTION("radial distortion polynomial") {
    c.k1 = -0.2;
    const Vec2 d = distort_normalized(c, Vec2(0.1, 0));
    CHECK(d.x() == Catch::Approx(0.1 * (1.0 - 0.002)).margin(1e-15));
    CHECK(d.y() == 0.0);
    const auto px = project(c, Vec3(0.1, 0, 1.0));
    REQUIRE(px.has_value());
    CHECK(px->x() == Catch::Approx(c.fx * 0.0998 + c.cx).margin(1e-9));
  }

  SECTION("points behind the near plane give none") {
    CHECK_FALSE(project(c, Vec3(0, 0, -1.0)).has_value());
    CHECK_FALSE(project(c, Vec3(0, 0, c.near_clip * 0.5)).has_value());
  }

  SECTION("projection may land outside the image") {
    const auto px = project(c, Vec3(5.0, 0, 1.0));
    REQUIRE(px.has_value());
    CHECK_FALSE(pixel_in_bounds(c, *px));
  }
}

TEST_CASE("projection is scale covariant in depth", "[camera]") {
  CameraModel c;
  c.k1 = -0.1;
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 1.0);
    const auto base = project(c, p);
    REQUIRE(base.has_value());
    for (double lambda : {0.5, 2.0, 7.5}) {
      const auto scaled = project(c, lambda * p);
      REQUIRE(scaled.has_value());
      CHECK((*scaled - *base).norm() < 1e-9);
    }
  }
}

TEST_CASE("distortion with zero coefficients is the identity", "[camera]") {
  CameraModel c;
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p(rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(distort_normalized(c, p) == p);
  }
}

TEST_CASE("pixel rays", "[camera]") {
  SECTION("principal point maps to the optical axis") {
    CameraModel c;
    c.k1 = -0.2;
    const Ray r = pixel_ray(c, Vec2(c.cx, c.cy));
    CHECK((r.dir - Vec3(0, 0, 1)).norm() < 1e-10);
    CHECK(r.origin.norm() == 0.0);
  }

  SECTION("project then pixel_ray recovers the point") {
    Rng rng(23);
    CameraModel c = random_camera(rng, false);
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1));
      const auto proj = project_full(c, p);
      if (!proj) continue;
      const Ray r = pixel_ray(c, proj->pixel);
      const Vec3 on_ray = r.origin + r.dir * (p - r.origin).norm();
      CHECK((on_ray - p).norm() < 1e-6);
    }
  }

  SECTION("distort(undistort(pixel)) round trip within 1e-6 px for r < 0.5") {
    CameraModel c;
    c.k1 = -0.2;
    c.k2 = 0.05;
    c.p1 = 0.001;
    c.p2 = -0.001;
    Rng rng(41);
    for (int i = 0; i < 500; ++i) {
      // distorted normalized radius below 0.5
      const double ang = rng.uniform(0, 2 * M_PI);
      const double rad = rng.uniform(0, 0.5);
      const Vec2 distorted(rad * std::cos(ang), rad * std::sin(ang));
      const Vec2 undist = undistort_normalized(c, distorted);
      const Vec2 redist = distort_normalized(c, undist);
      CHECK((redist - distorted).norm() * c.fx < 1e-6);
    }
  }
}

TEST_CASE("reprojection error below half a pixel over random cameras", "[camera]") {
  Rng rng(2024);
  int tested = 0;
  for (int cam_i = 0; cam_i < 10; ++cam_i) {
    const CameraModel c = random_camera(rng, true);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p(rng.uniform(-0.8, 0.8), rng.uniform(0.2, 1.8), rng.uniform(-0.8, 0.8));
      const auto proj = project_full(c, p);
      if (!proj || !pixel_in_bounds(c, proj->pixel)) continue;
      const Ray r = pixel_ray(c, proj->pixel);
      const Vec3 probe = r.origin + r.dir * (p - r.origin).norm();
      const auto back = project(c, probe);
      REQUIRE(back.has_value());
      CHECK((*back - proj->pixel).norm() < 0.5);
      ++tested;
    }
  }
  CHECK(tested >= 500);
}

TEST_CASE("undistortion reports divergence on absurd coefficients", "[camera]") {
  CameraModel c;
  c.k1 = -6.0;  // wildly non-invertible
  CHECK_THROWS_AS(undistort_normalized(c, Vec2(0.9, 0.9)), Error);
}

TEST_CASE("sensor noise", "[camera]") {
  ImageF img(400, 300, 3, 0.5f);

  SECTION("zero sigma leaves the image untouched") {
    NoiseModel n;
    const ImageF out = add_sensor_noise(img, n, 7);
    CHECK(out.px == img.px);
  }

  SECTION("same seed gives identical output") {
    NoiseModel n{0.01, "per_frame"};
    const ImageF a = add_sensor_noise(img, n, 99);
    const ImageF b = add_sensor_noise(img, n, 99);
    CHECK(a.px == b.px);
    const ImageF other = add_sensor_noise(img, n, 100);
    CHECK(other.px != a.px);
  }

  SECTION("sample standard deviation tracks sigma") {
    NoiseModel n{0.05, "per_frame"};
    const ImageF out = add_sensor_noise(img, n, 31);
    REQUIRE(out.px.size() >= 100000);
    double sum = 0, sum2 = 0;
    size_t count = 0;
    for (size_t i = 0; i < out.px.size(); ++i) {
      const double d = out.px[i] - img.px[i];
      // stay clear of the clamp region
      if (out.px[i] <= 0.0f || out.px[i] >= 1.0f) continue;
      sum += d;
      sum2 += d * d;
      ++count;
    }
    const double mean = sum / count;
    const double stddev = std::sqrt(sum2 / count - mean * mean);
    CHECK(stddev == Catch::Approx(0.05).epsilon(0.05));
  }
}

TEST_CASE("camera validation", "[camera]") {
  CameraModel c;
  c.fx = -1;
  CHECK_THROWS_AS(validate_camera(c), Error);
  c = CameraModel{};
  c.near_clip = 5;
  c.far_clip = 2;
  CHECK_THROWS_AS(validate_camera(c), Error);
  c = CameraModel{};
  CHECK_NOTHROW(validate_camera(c));
}
