#include "polarec/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polarec {

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0)
    omp_set_num_threads(n);
  else
    omp_set_num_threads(omp_get_num_procs());
#else
  (void)n;
#endif
}

std::vector<Eigen::Vector3d> backproject(const DepthMap& depth,
                                         const CameraModel& cam) {
  if (depth.width() != cam.width || depth.height() != cam.height)
    throw std::invalid_argument("backproject: dimension mismatch");
  std::vector<Eigen::Vector3d> cloud;
  cloud.reserve(depth.valid_count());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      if (depth.valid.at(x, y))
        cloud.push_back(cam.unproject(x, y, depth.depth(x, y)));
  return cloud;
}

DepthMap reproject(const DepthMap& depth_src, const CameraModel& cam_src,
                   const CameraModel& cam_dst) {
  if (depth_src.width() != cam_src.width ||
      depth_src.height() != cam_src.height)
    throw std::invalid_argument("reproject: dimension mismatch");
  const Pose rel = cam_dst.pose.compose(cam_src.pose.inverse());
  if (!rel.t.allFinite() || !rel.R.allFinite())
    throw std::invalid_argument("reproject: non-finite relative pose");

  DepthMap out(cam_dst.width, cam_dst.height, depth_src.z_min,
               depth_src.z_max);
  // (depth, source index) keys make the z-buffer a total order.
  std::vector<int64_t> src_of(out.grid.pixel_count(),
                              std::numeric_limits<int64_t>::max());
  const int w = depth_src.width(), h = depth_src.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth_src.valid.at(x, y)) continue;
      const Eigen::Vector3d p_dst =
          rel.apply(cam_src.unproject(x, y, depth_src.depth(x, y)));
      if (p_dst.z() <= 0.0) continue;
      const Eigen::Vector2d uv = cam_dst.project(p_dst);
      const int u = static_cast<int>(std::lround(uv.x()));
      const int v = static_cast<int>(std::lround(uv.y()));
      if (u < 0 || u >= out.width() || v < 0 || v >= out.height()) continue;
      const size_t di = static_cast<size_t>(v) * out.width() + u;
      const int64_t src_index = static_cast<int64_t>(y) * w + x;
      const double z = p_dst.z();
      if (!out.valid.at(u, v) || z < out.depth(u, v) ||
          (z == out.depth(u, v) && src_index < src_of[di])) {
        out.set_depth(u, v, z);
        src_of[di] = src_index;
      }
    }
  }
  return out;
}

void gradient(const ImageGrid& grid, ImageGrid& gx, ImageGrid& gy) {
  if (grid.channels != 1)
    throw std::invalid_argument("gradient: single-channel input required");
  const int w = grid.width, h = grid.height;
  gx = ImageGrid(w, h);
  gy = ImageGrid(w, h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x == 0)
        gx.at(x, y) = grid.at(1, y) - grid.at(0, y);
      else if (x == w - 1)
        gx.at(x, y) = grid.at(w - 1, y) - grid.at(w - 2, y);
      else
        gx.at(x, y) = 0.5 * (grid.at(x + 1, y) - grid.at(x - 1, y));
      if (y == 0)
        gy.at(x, y) = grid.at(x, 1) - grid.at(x, 0);
      else if (y == h - 1)
        gy.at(x, y) = grid.at(x, h - 1) - grid.at(x, h - 2);
      else
        gy.at(x, y) = 0.5 * (grid.at(x, y + 1) - grid.at(x, y - 1));
    }
  }
}

namespace {

// One-dimensional masked difference along one axis.
bool axis_diff(const ImageGrid& g, const Mask& m, int x, int y, int dx, int dy,
               int n, double& out) {
  const int c = (dx != 0) ? x : y;
  const bool has_prev = c > 0 && m.at(x - dx, y - dy);
  const bool has_next = c < n - 1 && m.at(x + dx, y + dy);
  if (has_prev && has_next) {
    out = 0.5 * (g.at(x + dx, y + dy) - g.at(x - dx, y - dy));
    return true;
  }
  if (has_next) {
    out = g.at(x + dx, y + dy) - g.at(x, y);
    return true;
  }
  if (has_prev) {
    out = g.at(x, y) - g.at(x - dx, y - dy);
    return true;
  }
  return false;
}

}  // namespace

void masked_gradient(const ImageGrid& grid, const Mask& valid, ImageGrid& gx,
                     ImageGrid& gy, Mask& out_valid) {
  const int w = grid.width, h = grid.height;
  gx = ImageGrid(w, h);
  gy = ImageGrid(w, h);
  out_valid = Mask(w, h, false);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!valid.at(x, y)) continue;
      double dzx, dzy;
      if (axis_diff(grid, valid, x, y, 1, 0, w, dzx) &&
          axis_diff(grid, valid, x, y, 0, 1, h, dzy)) {
        gx.at(x, y) = dzx;
        gy.at(x, y) = dzy;
        out_valid.set(x, y, true);
      }
    }
  }
}

std::vector<OrientedPoint> merge_clouds(
    const std::vector<std::vector<OrientedPoint>>& clouds, double voxel) {
  if (!(voxel > 0.0))
    throw std::invalid_argument("merge_clouds: voxel must be > 0");
  std::unordered_set<uint64_t> occupied;
  std::vector<OrientedPoint> merged;
  auto key = [voxel](const Eigen::Vector3d& p) {
    // 21-bit signed cell coordinates packed into one key
    uint64_t k = 0;
    for (int c = 0; c < 3; ++c) {
      const int64_t cell =
          static_cast<int64_t>(std::floor(p[c] / voxel)) + (1 << 20);
      k = (k << 21) | static_cast<uint64_t>(cell & 0x1fffff);
    }
    return k;
  };
  for (const auto& cloud : clouds)
    for (const OrientedPoint& p : cloud)
      if (occupied.insert(key(p.position)).second) merged.push_back(p);
  return merged;
}

}  // namespace polarec
