#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "polarec/camera.hpp"
#include "polarec/image.hpp"
#include "polarec/polarization.hpp"

namespace polarec {

struct Material {
  bool checker = false;
  double albedo = 0.7;          // constant albedo, or checker color A
  double albedo_b = 0.3;        // checker color B
  double checker_scale = 0.25;  // checker cell size, meters
  double ka = 0.1;
  double kd = 0.7;
  double ks = 0.0;
  double shininess = 32.0;

  double albedo_at(const Eigen::Vector3d& p) const;
};

struct Surface {
  enum class Type { Plane, Sphere, Box };
  Type type = Type::Plane;
  // plane
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  bool finite = false;
  Eigen::Vector2d half_extent = Eigen::Vector2d::Zero();
  // sphere
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 1.0;
  // box
  Eigen::Vector3d bmin = Eigen::Vector3d::Zero();
  Eigen::Vector3d bmax = Eigen::Vector3d::Zero();

  Material material;
};

struct PointLight {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double radiance = 1.0;
};

struct SyntheticScene {
  std::vector<Surface> surfaces;
  PointLight light;
  double background_depth = 0.0;  // <= 0: background pixels stay invalid
  double z_min = 0.1;
  double z_max = 10.0;
  double eta = kDefaultEta;
};

struct GroundTruth {
  DepthMap depth;
  NormalMap normals;         // camera-facing orientation, n_z = cos(zenith) >= 0
  ImageGrid aolp, dolp;
  ImageGrid azimuth_true;    // [0, 2pi)
  ImageGrid zenith_true;     // [0, pi/2]
  ImageGrid intensity;       // unpolarized Blinn-Phong radiance
  std::vector<Reflection> reflection;
  std::vector<int32_t> surface_id;  // -1 for background
  Mask hit;                  // true where a surface was struck

  Reflection label(int x, int y) const {
    return reflection[static_cast<size_t>(y) * depth.width() + x];
  }
  int32_t surface(int x, int y) const {
    return surface_id[static_cast<size_t>(y) * depth.width() + x];
  }
};

struct RenderResult {
  PolarFrame frame;
  GroundTruth gt;
};

// Ray-cast the scene through the pinhole camera and synthesize the four
// polarizer channels via I(a) = (I_un/2)(1 + dolp*cos(2a - 2*aolp)).
RenderResult render_scene(const SyntheticScene& scene, const CameraModel& cam);

// Deterministic sparse seed sampling, biased toward high image-gradient
// pixels, with multiplicative Gaussian depth noise.
DepthMap sample_sparse_seeds(const GroundTruth& gt, double fraction,
                             double noise_rel, uint64_t seed);

struct PriorWarp {
  enum class Mode { Identity, Reciprocal };
  Mode mode = Mode::Reciprocal;
  double a = 1.0;  // z' = a / (z + b)
  double b = 0.0;
};

// Simulated relative-depth prior: disparity-space warp of the ground truth
// plus an optional constant offset per surface (wrong cross-surface ordering,
// correct within-surface gradients).
DepthMap simulate_relative_prior(const GroundTruth& gt, const PriorWarp& warp,
                                 const std::vector<double>& surface_bias,
                                 uint64_t seed);

// Scene (de)serialization; the JSON schema doubles as the scene manifest.
SyntheticScene scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const SyntheticScene& scene);

namespace serial {
RenderResult render_scene(const SyntheticScene& scene, const CameraModel& cam);
}

}  // namespace polarec
