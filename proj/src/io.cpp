#include "polarec/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace polarec {

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::string& path) {
  throw std::ios_base::failure(what + ": " + path);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail("cannot write", path);
  out << text;
}

// ---------------------------------------------------------------------------
// PFM

void write_pfm(const std::string& path, const ImageGrid& grid) {
  if (grid.channels != 1 && grid.channels != 3)
    throw std::invalid_argument("write_pfm: 1 or 3 channels required");
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail("cannot write", path);
  out << (grid.channels == 1 ? "Pf" : "PF") << "\n"
      << grid.width << " " << grid.height << "\n-1.0\n";
  // PFM rows run bottom to top
  std::vector<float> row(static_cast<size_t>(grid.width) * grid.channels);
  for (int y = grid.height - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width; ++x)
      for (int c = 0; c < grid.channels; ++c)
        row[static_cast<size_t>(x) * grid.channels + c] =
            static_cast<float>(grid.at(x, y, c));
    out.write(reinterpret_cast<const char*>(row.data()),
              row.size() * sizeof(float));
  }
}

ImageGrid read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot open", path);
  std::string magic;
  in >> magic;
  if (magic != "Pf" && magic != "PF") io_fail("not a PFM file", path);
  int w, h;
  double scale;
  in >> w >> h >> scale;
  in.get();  // single whitespace after the header
  if (w < 2 || h < 2) io_fail("bad PFM dimensions", path);
  const int channels = magic == "Pf" ? 1 : 3;
  const bool little_endian = scale < 0.0;
  ImageGrid grid(w, h, channels);
  std::vector<float> row(static_cast<size_t>(w) * channels);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) io_fail("truncated PFM", path);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        float v = row[static_cast<size_t>(x) * channels + c];
        if (!little_endian) {
          char* b = reinterpret_cast<char*>(&v);
          std::swap(b[0], b[3]);
          std::swap(b[1], b[2]);
        }
        grid.at(x, y, c) = v;
      }
  }
  return grid;
}

void write_depth_pfm(const std::string& path, const DepthMap& depth) {
  ImageGrid g(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      g.at(x, y) = depth.valid.at(x, y) ? depth.depth(x, y) : -1.0;
  write_pfm(path, g);
}

DepthMap read_depth_pfm(const std::string& path, double z_min, double z_max) {
  const ImageGrid g = read_pfm(path);
  if (g.channels != 1) io_fail("depth PFM must be single-channel", path);
  DepthMap d(g.width, g.height, z_min, z_max);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (g.at(x, y) > 0.0) d.set_depth(x, y, g.at(x, y));
  return d;
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

void write_png16(const std::string& path, const ImageGrid& grid,
                 double scale) {
  if (grid.channels != 1)
    throw std::invalid_argument("write_png16: single-channel required");
  if (!(scale > 0.0)) throw std::invalid_argument("write_png16: bad scale");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) io_fail("cannot write", path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail("libpng write error", path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, grid.width, grid.height, 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint16_t> row(grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const double v = std::clamp(grid.at(x, y) / scale, 0.0, 1.0);
      uint16_t q = static_cast<uint16_t>(std::lround(v * 65535.0));
      row[x] = static_cast<uint16_t>((q >> 8) | (q << 8));  // big-endian
    }
    png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageGrid read_png16(const std::string& path, double scale) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) io_fail("cannot open", path);
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail("libpng read error", path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int w = png_get_image_width(png, info);
  const int h = png_get_image_height(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    io_fail("expected 16-bit grayscale PNG", path);
  }
  ImageGrid grid(w, h);
  std::vector<uint16_t> row(w);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, reinterpret_cast<png_bytep>(row.data()), nullptr);
    for (int x = 0; x < w; ++x) {
      const uint16_t be = row[x];
      const uint16_t q = static_cast<uint16_t>((be >> 8) | (be << 8));
      grid.at(x, y) = q / 65535.0 * scale;
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return grid;
}

void write_png8_rgb(const std::string& path, const ImageGrid& rgb) {
  if (rgb.channels != 3)
    throw std::invalid_argument("write_png8_rgb: 3 channels required");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) io_fail("cannot write", path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    io_fail("libpng write error", path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, rgb.width, rgb.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<uint8_t> row(static_cast<size_t>(rgb.width) * 3);
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x)
      for (int c = 0; c < 3; ++c)
        row[static_cast<size_t>(x) * 3 + c] = static_cast<uint8_t>(
            std::clamp(std::lround(rgb.at(x, y, c)), 0l, 255l));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------------------
// PLY

void write_ply(const std::string& path,
               const std::vector<OrientedPoint>& points) {
  std::ofstream out(path);
  if (!out) io_fail("cannot write", path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float nx\nproperty float ny\nproperty float nz\n"
      << "end_header\n";
  char line[256];
  for (const OrientedPoint& p : points) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.4f %.4f %.4f\n",
                  p.position.x(), p.position.y(), p.position.z(),
                  p.normal.x(), p.normal.y(), p.normal.z());
    out << line;
  }
}

// ---------------------------------------------------------------------------
// Camera rig JSON

CameraModel CameraRig::camera(size_t frame) const {
  if (frame >= frames.size())
    throw std::out_of_range("CameraRig: frame index out of range");
  CameraModel cam;
  cam.f = f;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  cam.pose = frames[frame];
  cam.validate();
  return cam;
}

CameraRig read_camera_rig(const std::string& path) {
  const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  CameraRig rig;
  rig.f = j.at("f").get<double>();
  rig.cx = j.at("cx").get<double>();
  rig.cy = j.at("cy").get<double>();
  rig.width = j.at("width").get<int>();
  rig.height = j.at("height").get<int>();
  for (const auto& jf : j.at("frames")) {
    Pose p;
    const auto& q = jf.at("q");  // [w, x, y, z]
    Eigen::Quaterniond quat(q.at(0).get<double>(), q.at(1).get<double>(),
                            q.at(2).get<double>(), q.at(3).get<double>());
    p.R = quat.normalized().toRotationMatrix();
    const auto& t = jf.at("t");
    p.t = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
    rig.frames.push_back(p);
  }
  if (rig.frames.empty()) io_fail("camera rig has no frames", path);
  return rig;
}

void write_camera_rig(const std::string& path, const CameraRig& rig) {
  nlohmann::json j;
  j["f"] = rig.f;
  j["cx"] = rig.cx;
  j["cy"] = rig.cy;
  j["width"] = rig.width;
  j["height"] = rig.height;
  j["frames"] = nlohmann::json::array();
  for (const Pose& p : rig.frames) {
    const Eigen::Quaterniond q(p.R);
    j["frames"].push_back(
        {{"q", {q.w(), q.x(), q.y(), q.z()}},
         {"t", {p.t.x(), p.t.y(), p.t.z()}}});
  }
  write_text_file(path, j.dump(2));
}

}  // namespace polarec
