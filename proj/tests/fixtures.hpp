#pragma once

#include <cmath>

#include "polarec/camera.hpp"
#include "polarec/synth.hpp"

namespace polarec::testing {

inline CameraModel make_camera(int w = 160, int h = 120, double f = 240.0) {
  CameraModel cam;
  cam.width = w;
  cam.height = h;
  cam.f = f;
  cam.cx = 0.5 * (w - 1);
  cam.cy = 0.5 * (h - 1);
  return cam;
}

inline Material matte_checker() {
  Material m;
  m.checker = true;
  m.albedo = 0.8;
  m.albedo_b = 0.35;
  m.checker_scale = 0.21;
  m.ka = 0.15;
  m.kd = 0.7;
  m.ks = 0.0;
  return m;
}

inline Material glossy(double ks = 0.9, double shininess = 8.0) {
  Material m = matte_checker();
  m.ks = ks;
  m.shininess = shininess;
  return m;
}

// One plane tilted about the image y-axis: depth grows along +x.
inline SyntheticScene tilted_plane_scene(double tilt_deg = 35.0,
                                         bool specular = false) {
  SyntheticScene s;
  s.z_min = 0.5;
  s.z_max = 8.0;
  s.eta = 1.5;
  s.light.position = {0.6, -0.8, 0.3};
  s.light.radiance = 1.0;
  Surface p;
  p.type = Surface::Type::Plane;
  const double a = tilt_deg * M_PI / 180.0;
  p.point = {0.0, 0.0, 2.0};
  p.normal = {std::sin(a), 0.0, -std::cos(a)};  // depth grows along +x
  p.material = specular ? glossy() : matte_checker();
  s.surfaces.push_back(p);
  return s;
}

// Two planes meeting in a crease at the image center, with a depth gap:
// left half tilts about y, right half sits much deeper and tilts about x.
inline SyntheticScene creased_scene() {
  SyntheticScene s;
  s.z_min = 0.5;
  s.z_max = 12.0;
  s.light.position = {0.5, -1.0, 0.2};
  Surface left;
  left.type = Surface::Type::Plane;
  left.point = {-0.6, 0.0, 1.6};
  left.normal = {std::sin(0.5), 0.0, -std::cos(0.5)};
  left.finite = true;
  left.half_extent = {2.0, 6.0};
  left.material = matte_checker();
  Surface right;
  right.type = Surface::Type::Plane;
  right.point = {1.2, 0.0, 6.0};
  right.normal = {0.0, std::sin(0.45), -std::cos(0.45)};
  right.material = matte_checker();
  s.surfaces.push_back(left);
  s.surfaces.push_back(right);
  return s;
}

// Room-like arrangement: back wall, floor, side wall, a sphere and a box.
inline SyntheticScene room_scene(bool with_specular = true) {
  SyntheticScene s;
  s.z_min = 0.4;
  s.z_max = 10.0;
  s.light.position = {0.4, -1.2, 0.8};
  Surface back;
  back.type = Surface::Type::Plane;
  back.point = {0.0, 0.0, 5.0};
  back.normal = {0.12, 0.0, -1.0};
  back.material = matte_checker();
  Surface floor;
  floor.type = Surface::Type::Plane;
  floor.point = {0.0, 0.9, 0.0};
  floor.normal = {0.0, -1.0, 0.18};
  floor.material = matte_checker();
  Surface side;
  side.type = Surface::Type::Plane;
  side.point = {1.6, 0.0, 0.0};
  side.normal = {-1.0, 0.0, 0.35};
  side.material = matte_checker();
  Surface ball;
  ball.type = Surface::Type::Sphere;
  ball.center = {-0.35, 0.25, 2.2};
  ball.radius = 0.45;
  ball.material = with_specular ? glossy(1.2, 6.0) : matte_checker();
  Surface crate;
  crate.type = Surface::Type::Box;
  crate.bmin = {0.25, 0.35, 2.6};
  crate.bmax = {0.95, 0.95, 3.3};
  crate.material = matte_checker();
  s.surfaces = {back, floor, side, ball, crate};
  return s;
}

// Two walls meeting at the image center, both reaching the camera frustum.
inline SyntheticScene two_wall_scene() {
  SyntheticScene s;
  s.z_min = 0.5;
  s.z_max = 8.0;
  s.light.position = {0.0, -0.9, 0.5};
  Surface lw;
  lw.type = Surface::Type::Plane;
  lw.point = {0.0, 0.0, 3.0};
  lw.normal = {std::sin(0.6), 0.0, -std::cos(0.6)};
  lw.material = matte_checker();
  Surface rw;
  rw.type = Surface::Type::Plane;
  rw.point = {0.0, 0.0, 3.0};
  rw.normal = {-std::sin(0.6), 0.0, -std::cos(0.6)};
  rw.material = matte_checker();
  s.surfaces = {lw, rw};
  return s;
}

}  // namespace polarec::testing
