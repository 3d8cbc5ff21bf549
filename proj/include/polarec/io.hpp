#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "polarec/camera.hpp"
#include "polarec/geometry.hpp"
#include "polarec/image.hpp"

namespace polarec {

// PFM, little-endian 32-bit float (scale -1.0). 1- or 3-channel.
void write_pfm(const std::string& path, const ImageGrid& grid);
ImageGrid read_pfm(const std::string& path);

// Depth <-> PFM: invalid pixels are stored as non-positive values.
void write_depth_pfm(const std::string& path, const DepthMap& depth);
DepthMap read_depth_pfm(const std::string& path, double z_min, double z_max);

// 16-bit grayscale PNG, linear encoding. Values are divided by `scale`
// before quantization to [0, 65535].
void write_png16(const std::string& path, const ImageGrid& grid, double scale);
ImageGrid read_png16(const std::string& path, double scale);

// 8-bit RGB PNG for visualizations (values already in [0,255]).
void write_png8_rgb(const std::string& path, const ImageGrid& rgb);

// ASCII PLY with x y z nx ny nz properties.
void write_ply(const std::string& path,
               const std::vector<OrientedPoint>& points);

// Camera rig description (intrinsics plus per-keyframe poses) as JSON.
struct CameraRig {
  double f = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  std::vector<Pose> frames;  // camera-from-world

  CameraModel camera(size_t frame) const;
};
CameraRig read_camera_rig(const std::string& path);
void write_camera_rig(const std::string& path, const CameraRig& rig);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace polarec
