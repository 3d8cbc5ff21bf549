#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace polarec {

// Row-major scalar image, channel index fastest.
struct ImageGrid {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int w, int h, int c = 1, double fill = 0.0)
      : width(w), height(h), channels(c),
        values(static_cast<size_t>(w) * h * c, fill) {
    if (w < 2 || h < 2 || c < 1)
      throw std::invalid_argument("ImageGrid: dimensions too small");
  }

  size_t index(int x, int y, int c = 0) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  double& at(int x, int y, int c = 0) { return values[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return values[index(x, y, c)]; }
  bool inside(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }

  bool same_size(const ImageGrid& o) const {
    return width == o.width && height == o.height;
  }

  void check_finite() const {
    for (double v : values)
      if (!std::isfinite(v))
        throw std::invalid_argument("ImageGrid: non-finite value");
  }
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> flags;

  Mask() = default;
  Mask(int w, int h, bool fill = false)
      : width(w), height(h),
        flags(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  bool at(int x, int y) const {
    return flags[static_cast<size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    flags[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
  }
  size_t count() const {
    size_t n = 0;
    for (uint8_t f : flags) n += f;
    return n;
  }
};

// Metric (or relative) depth with validity. Invalid pixels hold a sentinel
// that no operation reads; on disk they are encoded as non-positive values.
struct DepthMap {
  ImageGrid grid;   // 1 channel, meters (or arbitrary scale for priors)
  Mask valid;
  double z_min = 0.0;
  double z_max = 0.0;

  DepthMap() = default;
  DepthMap(int w, int h, double zmin, double zmax)
      : grid(w, h, 1, 0.0), valid(w, h, false), z_min(zmin), z_max(zmax) {
    if (!(zmin > 0.0) || !(zmax > zmin))
      throw std::invalid_argument("DepthMap: bad depth range");
  }

  int width() const { return grid.width; }
  int height() const { return grid.height; }

  double depth(int x, int y) const { return grid.at(x, y); }
  void set_depth(int x, int y, double z) {
    grid.at(x, y) = z;
    valid.set(x, y, true);
  }
  void invalidate(int x, int y) {
    grid.at(x, y) = 0.0;
    valid.set(x, y, false);
  }
  size_t valid_count() const { return valid.count(); }
};

// Unit normals in camera coordinates, z-component oriented away from the
// camera-facing side so that n_z = cos(zenith) >= 0.
struct NormalMap {
  ImageGrid grid;  // 3 channels
  Mask valid;

  NormalMap() = default;
  NormalMap(int w, int h) : grid(w, h, 3, 0.0), valid(w, h, false) {}

  int width() const { return grid.width; }
  int height() const { return grid.height; }
};

}  // namespace polarec
