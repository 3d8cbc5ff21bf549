#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace polarec {

// Rigid transform, camera-from-world.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p_world) const {
    return R * p_world + t;
  }
  Pose inverse() const {
    Pose inv;
    inv.R = R.transpose();
    inv.t = -inv.R * t;
    return inv;
  }
  // this ∘ other
  Pose compose(const Pose& other) const {
    Pose out;
    out.R = R * other.R;
    out.t = R * other.t + t;
    return out;
  }
};

// Pinhole camera: +Z into the scene, image origin top-left, +x right, +y down.
struct CameraModel {
  double f = 0.0;       // focal length in pixels
  double cx = 0.0;      // principal point
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Pose pose;            // camera-from-world

  void validate() const {
    if (!(f > 0.0)) throw std::invalid_argument("CameraModel: f must be > 0");
    if (cx < 0.0 || cx > width - 1 || cy < 0.0 || cy > height - 1)
      throw std::invalid_argument("CameraModel: principal point outside image");
    Eigen::Matrix3d rtr = pose.R.transpose() * pose.R;
    if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(pose.R.determinant() - 1.0) > 1e-9)
      throw std::invalid_argument("CameraModel: rotation is not orthonormal");
  }

  // Pixel + depth -> 3D point in the camera frame.
  Eigen::Vector3d unproject(double x, double y, double z) const {
    return {(x - cx) * z / f, (y - cy) * z / f, z};
  }
  // Camera-frame point -> pixel coordinates (caller checks z > 0).
  Eigen::Vector2d project(const Eigen::Vector3d& p) const {
    return {f * p.x() / p.z() + cx, f * p.y() / p.z() + cy};
  }
  // Unit vector from a camera-frame point toward the camera center.
  Eigen::Vector3d viewer_dir(double x, double y) const {
    Eigen::Vector3d v(-(x - cx) / f, -(y - cy) / f, -1.0);
    return v.normalized();
  }
};

}  // namespace polarec
