#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "polarec/io.hpp"

using namespace polarec;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("pfm round trip, single channel") {
  ImageGrid g(23, 17);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (auto& v : g.values) v = u(rng);
  FileGuard f{tmp_path("polarec_t1.pfm")};
  write_pfm(f.path, g);
  const ImageGrid r = read_pfm(f.path);
  REQUIRE(r.width == g.width);
  REQUIRE(r.height == g.height);
  REQUIRE(r.channels == 1);
  for (size_t i = 0; i < g.values.size(); ++i)
    CHECK(r.values[i] == doctest::Approx(g.values[i]).epsilon(1e-6));
}

TEST_CASE("pfm round trip, three channels") {
  ImageGrid g(9, 7, 3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : g.values) v = u(rng);
  FileGuard f{tmp_path("polarec_t3.pfm")};
  write_pfm(f.path, g);
  const ImageGrid r = read_pfm(f.path);
  REQUIRE(r.channels == 3);
  for (size_t i = 0; i < g.values.size(); ++i)
    CHECK(r.values[i] == doctest::Approx(g.values[i]).epsilon(1e-6));
}

TEST_CASE("depth pfm encodes invalid pixels as non-positive") {
  DepthMap d(12, 10, 0.5, 9.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      if ((x + y) % 3) d.set_depth(x, y, 0.5 + 0.07 * (x + 12 * y));
  FileGuard f{tmp_path("polarec_depth.pfm")};
  write_depth_pfm(f.path, d);
  // raw view: holes must be non-positive
  const ImageGrid raw = read_pfm(f.path);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      if (!d.valid.at(x, y)) CHECK(raw.at(x, y) <= 0.0);
  const DepthMap r = read_depth_pfm(f.path, 0.5, 9.0);
  CHECK(r.z_min == doctest::Approx(0.5));
  CHECK(r.z_max == doctest::Approx(9.0));
  CHECK(r.valid.flags == d.valid.flags);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 12; ++x)
      if (d.valid.at(x, y))
        CHECK(r.depth(x, y) == doctest::Approx(d.depth(x, y)).epsilon(1e-6));
}

TEST_CASE("png16 round trip within quantization error") {
  ImageGrid g(31, 22);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (auto& v : g.values) v = u(rng);
  const double scale = 2.0;  // full range maps to [0, 65535]
  FileGuard f{tmp_path("polarec_ch.png")};
  write_png16(f.path, g, scale);
  const ImageGrid r = read_png16(f.path, scale);
  REQUIRE(r.width == g.width);
  REQUIRE(r.height == g.height);
  const double q = scale / 65535.0;
  for (size_t i = 0; i < g.values.size(); ++i)
    CHECK(std::fabs(r.values[i] - g.values[i]) <= 0.5 * q + 1e-12);
}

TEST_CASE("png16 written twice is identical on disk") {
  ImageGrid g(16, 16);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : g.values) v = u(rng);
  FileGuard f1{tmp_path("polarec_d1.png")};
  FileGuard f2{tmp_path("polarec_d2.png")};
  write_png16(f1.path, g, 1.0);
  write_png16(f2.path, g, 1.0);
  CHECK(read_text_file(f1.path) == read_text_file(f2.path));
}

TEST_CASE("ply export: header and one vertex per point") {
  std::vector<OrientedPoint> pts;
  pts.push_back({{1.0, 2.0, 3.0}, {0.0, 0.0, 1.0}});
  pts.push_back({{-0.5, 0.25, 4.0}, {0.6, 0.0, 0.8}});
  FileGuard f{tmp_path("polarec_cloud.ply")};
  write_ply(f.path, pts);
  std::istringstream in(read_text_file(f.path));
  std::string line;
  std::getline(in, line);
  CHECK(line == "ply");
  std::getline(in, line);
  CHECK(line == "format ascii 1.0");
  std::getline(in, line);
  CHECK(line == "element vertex 2");
  // six property lines then end_header
  const char* props[] = {"x", "y", "z", "nx", "ny", "nz"};
  for (const char* p : props) {
    std::getline(in, line);
    CHECK(line == std::string("property float ") + p);
  }
  std::getline(in, line);
  CHECK(line == "end_header");
  double x, y, z, nx, ny, nz;
  in >> x >> y >> z >> nx >> ny >> nz;
  CHECK(x == doctest::Approx(1.0));
  CHECK(nz == doctest::Approx(1.0));
  in >> x >> y >> z >> nx >> ny >> nz;
  CHECK(z == doctest::Approx(4.0));
  CHECK(nx == doctest::Approx(0.6));
  CHECK(static_cast<bool>(in));
}

TEST_CASE("camera rig json round trip") {
  CameraRig rig;
  rig.f = 320.0;
  rig.cx = 159.5;
  rig.cy = 119.5;
  rig.width = 320;
  rig.height = 240;
  Pose p0;  // identity
  Pose p1;
  p1.R = Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 2).normalized())
             .toRotationMatrix();
  p1.t = {0.1, -0.2, 0.05};
  rig.frames = {p0, p1};
  FileGuard f{tmp_path("polarec_rig.json")};
  write_camera_rig(f.path, rig);
  const CameraRig r = read_camera_rig(f.path);
  REQUIRE(r.frames.size() == 2);
  CHECK(r.f == doctest::Approx(rig.f));
  CHECK(r.width == rig.width);
  CHECK(r.height == rig.height);
  for (size_t i = 0; i < 2; ++i) {
    CHECK((r.frames[i].R - rig.frames[i].R).norm() < 1e-9);
    CHECK((r.frames[i].t - rig.frames[i].t).norm() < 1e-9);
  }
  const CameraModel cam = r.camera(1);
  CHECK_NOTHROW(cam.validate());
  CHECK(cam.f == doctest::Approx(320.0));
}

TEST_CASE("readers reject missing files") {
  CHECK_THROWS(read_pfm(tmp_path("polarec_missing.pfm")));
  CHECK_THROWS(read_png16(tmp_path("polarec_missing.png"), 1.0));
  CHECK_THROWS(read_camera_rig(tmp_path("polarec_missing.json")));
}
