#pragma once

#include <Eigen/Dense>
#include <vector>

#include "polarec/camera.hpp"
#include "polarec/image.hpp"

namespace polarec {

struct OrientedPoint {
  Eigen::Vector3d position;
  Eigen::Vector3d normal;  // (0,0,0) when no normal is attached
};

// One 3D point per valid depth pixel, camera frame.
std::vector<Eigen::Vector3d> backproject(const DepthMap& depth,
                                         const CameraModel& cam);

// Warp a depthmap into another view. Nearest-pixel splat with z-buffering;
// ties broken by smaller depth, then smaller source pixel index.
DepthMap reproject(const DepthMap& depth_src, const CameraModel& cam_src,
                   const CameraModel& cam_dst);

// Central differences in the interior, one-sided at the borders.
void gradient(const ImageGrid& grid, ImageGrid& gx, ImageGrid& gy);

// Gradient that honours a validity mask: central where both neighbors are
// valid, one-sided where one is, masked out otherwise.
void masked_gradient(const ImageGrid& grid, const Mask& valid, ImageGrid& gx,
                     ImageGrid& gy, Mask& out_valid);

// Concatenate clouds keeping one point per voxel (first wins, insertion
// order), used to merge per-keyframe reconstructions.
std::vector<OrientedPoint> merge_clouds(
    const std::vector<std::vector<OrientedPoint>>& clouds, double voxel);

void set_threads(int n);  // 0 = auto

}  // namespace polarec
