#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "polarec/geometry.hpp"
#include "polarec/synth.hpp"

using namespace polarec;
using namespace polarec::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("fronto-parallel plane renders with zero zenith and dolp") {
  SyntheticScene s;
  s.z_min = 0.5;
  s.z_max = 5.0;
  s.light.position = {0.3, -0.5, 0.2};
  Surface p;
  p.type = Surface::Type::Plane;
  p.point = {0.0, 0.0, 2.0};
  p.normal = {0.0, 0.0, -1.0};
  p.material = matte_checker();
  s.surfaces.push_back(p);
  const CameraModel cam = make_camera(64, 48, 120.0);
  const RenderResult r = render_scene(s, cam);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) {
      REQUIRE(r.gt.hit.at(x, y));
      CHECK(r.gt.zenith_true.at(x, y) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(r.gt.dolp.at(x, y) == doctest::Approx(0.0).epsilon(1e-9));
      CHECK(r.gt.depth.depth(x, y) == doctest::Approx(2.0));
    }
}

TEST_CASE("45-degree tilted diffuse plane: azimuth and zenith at center") {
  const SyntheticScene s = tilted_plane_scene(45.0);
  const CameraModel cam = make_camera(65, 49, 200.0);  // odd: integer center
  const RenderResult r = render_scene(s, cam);
  const int cx = 32, cy = 24;
  REQUIRE(r.gt.hit.at(cx, cy));
  CHECK(r.gt.zenith_true.at(cx, cy) == doctest::Approx(kPi / 4).epsilon(1e-6));
  // depth grows along +x, so the stored normal tilts toward -x: azimuth pi
  CHECK(r.gt.azimuth_true.at(cx, cy) == doctest::Approx(kPi).epsilon(1e-6));
  for (int y = 0; y < 49; ++y)
    for (int x = 0; x < 65; ++x) {
      const double az = r.gt.azimuth_true.at(x, y);
      CHECK((std::fabs(az - kPi) < 1e-9 || az < 1e-9 ||
             std::fabs(az - 2 * kPi) < 1e-9));
      CHECK(r.gt.label(x, y) == Reflection::Diffuse);
    }
}

TEST_CASE("ground truth is self-consistent") {
  for (const SyntheticScene& s :
       {tilted_plane_scene(30.0), room_scene(true), creased_scene()}) {
    const CameraModel cam = make_camera();
    const RenderResult r = render_scene(s, cam);
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        if (!r.gt.hit.at(x, y)) continue;
        const double az = r.gt.azimuth_true.at(x, y);
        const double ze = r.gt.zenith_true.at(x, y);
        // normal reconstructed from (azimuth, zenith)
        CHECK(std::fabs(std::cos(az) * std::sin(ze) -
                        r.gt.normals.grid.at(x, y, 0)) < 1e-9);
        CHECK(std::fabs(std::sin(az) * std::sin(ze) -
                        r.gt.normals.grid.at(x, y, 1)) < 1e-9);
        CHECK(std::fabs(std::cos(ze) - r.gt.normals.grid.at(x, y, 2)) < 1e-9);
        // dolp consistent with the labeled reflection model
        const double expect =
            r.gt.label(x, y) == Reflection::Diffuse
                ? diffuse_dolp(ze, s.eta)
                : specular_dolp(ze, s.eta);
        CHECK(std::fabs(r.gt.dolp.at(x, y) - expect) < 1e-9);
        // channel sum identity: I(0)+I(90) == I(45)+I(135) == I_un
        const double s02 = r.frame.channels[0].at(x, y) +
                           r.frame.channels[2].at(x, y);
        const double s13 = r.frame.channels[1].at(x, y) +
                           r.frame.channels[3].at(x, y);
        CHECK(std::fabs(s02 - s13) < 1e-9);
        CHECK(std::fabs(s02 - r.gt.intensity.at(x, y)) < 1e-9);
      }
    }
  }
}

TEST_CASE("render/measure round trip recovers aolp and dolp") {
  const SyntheticScene s = room_scene(true);
  const CameraModel cam = make_camera();
  const RenderResult r = render_scene(s, cam);
  const PolarMeasurement m = stokes_from_channels(r.frame);
  size_t checked = 0;
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      if (!m.valid.at(x, y)) continue;
      REQUIRE(r.gt.hit.at(x, y));
      CHECK(std::fabs(m.dolp.at(x, y) - r.gt.dolp.at(x, y)) < 1e-6);
      double d = std::fabs(m.aolp.at(x, y) - r.gt.aolp.at(x, y));
      d = std::min(d, kPi - d);
      CHECK(d < 1e-6);
      ++checked;
    }
  CHECK(checked > 1000);
}

TEST_CASE("diffuse-only scenes never label a pixel specular") {
  const RenderResult r = render_scene(room_scene(false), make_camera());
  for (int y = 0; y < r.gt.depth.height(); ++y)
    for (int x = 0; x < r.gt.depth.width(); ++x)
      if (r.gt.hit.at(x, y)) CHECK(r.gt.label(x, y) == Reflection::Diffuse);
}

TEST_CASE("specular highlight pixels exist and are labeled") {
  const RenderResult r = render_scene(room_scene(true), make_camera());
  size_t spec = 0;
  for (size_t i = 0; i < r.gt.reflection.size(); ++i)
    if (r.gt.reflection[i] == Reflection::Specular) ++spec;
  CHECK(spec > 50);
}

TEST_CASE("serial and parallel render agree bit for bit") {
  const SyntheticScene s = room_scene(true);
  const CameraModel cam = make_camera(96, 72, 150.0);
  const RenderResult a = render_scene(s, cam);
  const RenderResult b = serial::render_scene(s, cam);
  for (int c = 0; c < 4; ++c)
    CHECK(a.frame.channels[c].values == b.frame.channels[c].values);
  CHECK(a.gt.depth.grid.values == b.gt.depth.grid.values);
  CHECK(a.gt.azimuth_true.values == b.gt.azimuth_true.values);
}

TEST_CASE("degenerate scene is rejected") {
  SyntheticScene s = tilted_plane_scene();
  // plane behind the camera
  s.surfaces[0].point = {0.0, 0.0, -2.0};
  s.surfaces[0].normal = {0.0, 0.0, 1.0};
  CHECK_THROWS_AS(render_scene(s, make_camera()), std::invalid_argument);
  s.surfaces.clear();
  CHECK_THROWS_AS(render_scene(s, make_camera()), std::invalid_argument);
}

TEST_CASE("sample_sparse_seeds") {
  const RenderResult r = render_scene(tilted_plane_scene(30.0), make_camera());
  const size_t m = r.gt.depth.valid_count();

  SUBCASE("fraction 1, no noise reproduces gt") {
    const DepthMap seeds = sample_sparse_seeds(r.gt, 1.0, 0.0, 42);
    CHECK(seeds.valid_count() == m);
    for (int y = 0; y < seeds.height(); ++y)
      for (int x = 0; x < seeds.width(); ++x)
        if (seeds.valid.at(x, y))
          CHECK(seeds.depth(x, y) == r.gt.depth.depth(x, y));
  }
  SUBCASE("1 percent noiseless subsample") {
    const DepthMap seeds = sample_sparse_seeds(r.gt, 0.01, 0.0, 42);
    CHECK(seeds.valid_count() ==
          static_cast<size_t>(std::ceil(0.01 * m)));
    for (int y = 0; y < seeds.height(); ++y)
      for (int x = 0; x < seeds.width(); ++x)
        if (seeds.valid.at(x, y))
          CHECK(seeds.depth(x, y) == r.gt.depth.depth(x, y));
  }
  SUBCASE("same seed twice is bit-identical") {
    const DepthMap a = sample_sparse_seeds(r.gt, 0.05, 0.02, 7);
    const DepthMap b = sample_sparse_seeds(r.gt, 0.05, 0.02, 7);
    CHECK(a.grid.values == b.grid.values);
    CHECK(a.valid.flags == b.valid.flags);
    const DepthMap c = sample_sparse_seeds(r.gt, 0.05, 0.02, 8);
    CHECK(a.valid.flags != c.valid.flags);
  }
  SUBCASE("fraction 0 rejected") {
    CHECK_THROWS_AS(sample_sparse_seeds(r.gt, 0.0, 0.0, 1),
                    std::invalid_argument);
  }
}

TEST_CASE("simulate_relative_prior") {
  const RenderResult r = render_scene(creased_scene(), make_camera());

  SUBCASE("reciprocal warp flips gradient direction") {
    PriorWarp w;
    w.mode = PriorWarp::Mode::Reciprocal;
    w.a = 1.0;
    w.b = 0.0;
    const DepthMap prior = simulate_relative_prior(r.gt, w, {}, 0);
    ImageGrid gx, gy, gxp, gyp;
    gradient(r.gt.depth.grid, gx, gy);
    gradient(prior.grid, gxp, gyp);
    size_t checked = 0;
    for (int y = 1; y < prior.height() - 1; ++y)
      for (int x = 1; x < prior.width() - 1; ++x) {
        if (!prior.valid.at(x, y)) continue;
        // skip pixels straddling the surface boundary
        const int sid = r.gt.surface(x, y);
        if (r.gt.surface(x - 1, y) != sid || r.gt.surface(x + 1, y) != sid ||
            r.gt.surface(x, y - 1) != sid || r.gt.surface(x, y + 1) != sid)
          continue;
        const double dot = gx.at(x, y) * gxp.at(x, y) + gy.at(x, y) * gyp.at(x, y);
        const double mag = std::hypot(gx.at(x, y), gy.at(x, y)) *
                           std::hypot(gxp.at(x, y), gyp.at(x, y));
        if (mag < 1e-12) continue;
        CHECK(dot / mag < -0.99);
        ++checked;
      }
    CHECK(checked > 1000);
  }

  SUBCASE("identity warp reproduces gt") {
    PriorWarp w;
    w.mode = PriorWarp::Mode::Identity;
    const DepthMap prior = simulate_relative_prior(r.gt, w, {}, 0);
    for (int y = 0; y < prior.height(); ++y)
      for (int x = 0; x < prior.width(); ++x)
        if (prior.valid.at(x, y))
          CHECK(prior.depth(x, y) == r.gt.depth.depth(x, y));
  }

  SUBCASE("surface bias preserves within-surface gradient direction") {
    PriorWarp w;
    w.mode = PriorWarp::Mode::Identity;
    const DepthMap prior = simulate_relative_prior(r.gt, w, {3.0, -1.0}, 0);
    ImageGrid gx, gy, gxp, gyp;
    gradient(r.gt.depth.grid, gx, gy);
    gradient(prior.grid, gxp, gyp);
    size_t checked = 0;
    for (int y = 1; y < prior.height() - 1; ++y)
      for (int x = 1; x < prior.width() - 1; ++x) {
        const int sid = r.gt.surface(x, y);
        if (sid < 0) continue;
        if (r.gt.surface(x - 1, y) != sid || r.gt.surface(x + 1, y) != sid ||
            r.gt.surface(x, y - 1) != sid || r.gt.surface(x, y + 1) != sid)
          continue;
        const double dot =
            gx.at(x, y) * gxp.at(x, y) + gy.at(x, y) * gyp.at(x, y);
        const double mag = std::hypot(gx.at(x, y), gy.at(x, y)) *
                           std::hypot(gxp.at(x, y), gyp.at(x, y));
        if (mag < 1e-12) continue;
        CHECK(dot / mag > 0.99);
        ++checked;
      }
    CHECK(checked > 1000);
  }

  SUBCASE("non-monotone warp rejected") {
    PriorWarp w;
    w.mode = PriorWarp::Mode::Reciprocal;
    w.a = 1.0;
    w.b = -2.0;  // pole inside the depth range
    CHECK_THROWS_AS(simulate_relative_prior(r.gt, w, {}, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("scene JSON round trip") {
  const SyntheticScene s = room_scene(true);
  const std::string text = scene_to_json_text(s);
  const SyntheticScene t = scene_from_json_text(text);
  REQUIRE(t.surfaces.size() == s.surfaces.size());
  CHECK(t.z_min == s.z_min);
  CHECK(t.eta == s.eta);
  const RenderResult a = render_scene(s, make_camera(64, 48, 100.0));
  const RenderResult b = render_scene(t, make_camera(64, 48, 100.0));
  CHECK(a.gt.depth.grid.values == b.gt.depth.grid.values);
}
