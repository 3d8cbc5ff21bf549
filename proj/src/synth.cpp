#include "polarec/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "polarec/geometry.hpp"

namespace polarec {

namespace {

constexpr double kPi = 3.14159265358979323846;

double checker_value(const Eigen::Vector3d& p, double scale, double a,
                     double b) {
  const long ix = static_cast<long>(std::floor(p.x() / scale));
  const long iy = static_cast<long>(std::floor(p.y() / scale));
  const long iz = static_cast<long>(std::floor(p.z() / scale));
  return ((ix + iy + iz) & 1) ? b : a;
}

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // world frame, unit
  int surface = -1;
};

bool intersect_plane(const Surface& s, const Eigen::Vector3d& o,
                     const Eigen::Vector3d& d, double& t,
                     Eigen::Vector3d& n) {
  const Eigen::Vector3d pn = s.normal.normalized();
  const double denom = d.dot(pn);
  if (std::fabs(denom) < 1e-12) return false;
  t = (s.point - o).dot(pn) / denom;
  if (t <= 1e-9) return false;
  if (s.finite) {
    // in-plane basis from the least-aligned world axis
    Eigen::Vector3d up = std::fabs(pn.z()) < 0.9 ? Eigen::Vector3d::UnitZ()
                                                 : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d e1 = up.cross(pn).normalized();
    const Eigen::Vector3d e2 = pn.cross(e1);
    const Eigen::Vector3d local = o + t * d - s.point;
    if (std::fabs(local.dot(e1)) > s.half_extent.x() ||
        std::fabs(local.dot(e2)) > s.half_extent.y())
      return false;
  }
  n = pn;
  return true;
}

bool intersect_sphere(const Surface& s, const Eigen::Vector3d& o,
                      const Eigen::Vector3d& d, double& t,
                      Eigen::Vector3d& n) {
  const Eigen::Vector3d oc = o - s.center;
  const double a = d.squaredNorm();
  const double b = 2.0 * oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double root = (-b - sq) / (2.0 * a);
  if (root <= 1e-9) root = (-b + sq) / (2.0 * a);
  if (root <= 1e-9) return false;
  t = root;
  n = (o + t * d - s.center).normalized();
  return true;
}

bool intersect_box(const Surface& s, const Eigen::Vector3d& o,
                   const Eigen::Vector3d& d, double& t, Eigen::Vector3d& n) {
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  int axis_min = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::fabs(d[a]) < 1e-15) {
      if (o[a] < s.bmin[a] || o[a] > s.bmax[a]) return false;
      continue;
    }
    double t0 = (s.bmin[a] - o[a]) / d[a];
    double t1 = (s.bmax[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > tmin) {
      tmin = t0;
      axis_min = a;
    }
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  double thit = tmin;
  if (thit <= 1e-9) thit = tmax;
  if (thit <= 1e-9) return false;
  t = thit;
  const Eigen::Vector3d p = o + t * d;
  // face normal from the dominant slab
  n = Eigen::Vector3d::Zero();
  if (axis_min >= 0 && thit == tmin) {
    n[axis_min] = d[axis_min] > 0 ? -1.0 : 1.0;
  } else {
    // exiting hit; pick the face the point is closest to
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      const double dlo = std::fabs(p[a] - s.bmin[a]);
      const double dhi = std::fabs(p[a] - s.bmax[a]);
      if (dlo < best) {
        best = dlo;
        n = Eigen::Vector3d::Zero();
        n[a] = -1.0;
      }
      if (dhi < best) {
        best = dhi;
        n = Eigen::Vector3d::Zero();
        n[a] = 1.0;
      }
    }
  }
  return true;
}

Hit cast_ray(const SyntheticScene& scene, const Eigen::Vector3d& o,
             const Eigen::Vector3d& d) {
  Hit best;
  for (size_t i = 0; i < scene.surfaces.size(); ++i) {
    const Surface& s = scene.surfaces[i];
    double t;
    Eigen::Vector3d n;
    bool ok = false;
    switch (s.type) {
      case Surface::Type::Plane: ok = intersect_plane(s, o, d, t, n); break;
      case Surface::Type::Sphere: ok = intersect_sphere(s, o, d, t, n); break;
      case Surface::Type::Box: ok = intersect_box(s, o, d, t, n); break;
    }
    if (ok && t < best.t) {
      best.t = t;
      best.normal = n;
      best.surface = static_cast<int>(i);
    }
  }
  return best;
}

struct PixelSample {
  bool hit = false;
  double depth = 0.0;
  Eigen::Vector3d normal_cam = Eigen::Vector3d::UnitZ();
  double azimuth = 0.0, zenith = 0.0;
  double aolp = 0.0, dolp = 0.0;
  double intensity = 0.0;
  Reflection label = Reflection::Diffuse;
  int surface = -1;
  std::array<double, 4> channels{0.0, 0.0, 0.0, 0.0};
};

PixelSample shade_pixel(const SyntheticScene& scene, const CameraModel& cam,
                        const Pose& world_from_cam, int x, int y) {
  PixelSample out;
  // Unnormalized direction with unit z makes the ray parameter equal to the
  // camera-frame depth.
  const Eigen::Vector3d dir_cam((x - cam.cx) / cam.f, (y - cam.cy) / cam.f,
                                1.0);
  const Eigen::Vector3d o = world_from_cam.t;
  const Eigen::Vector3d d = world_from_cam.R * dir_cam;
  const Hit hit = cast_ray(scene, o, d);
  if (!std::isfinite(hit.t)) return out;

  out.hit = true;
  out.surface = hit.surface;
  out.depth = hit.t;

  const Eigen::Vector3d p_world = o + hit.t * d;
  Eigen::Vector3d n_world = hit.normal;
  if (n_world.dot(d) > 0.0) n_world = -n_world;  // face the camera

  // Blinn-Phong shading with the camera-facing normal.
  const Surface& surf = scene.surfaces[hit.surface];
  const Material& m = surf.material;
  const double albedo = m.albedo_at(p_world);
  const Eigen::Vector3d L = (scene.light.position - p_world).normalized();
  const Eigen::Vector3d V = (o - p_world).normalized();
  const Eigen::Vector3d H = (L + V).normalized();
  const double s = scene.light.radiance;
  const double diffuse = m.kd * albedo * s * std::max(n_world.dot(L), 0.0);
  const double specular =
      m.ks * s * std::pow(std::max(n_world.dot(H), 0.0), m.shininess);
  out.intensity = m.ka * albedo + diffuse + specular;
  out.label = specular > diffuse ? Reflection::Specular : Reflection::Diffuse;

  // Normal in camera coordinates, z-component >= 0 (surface faces camera).
  Eigen::Vector3d n_cam = -(cam.pose.R * n_world);
  if (n_cam.z() < 0.0) n_cam.z() = 0.0;
  n_cam.normalize();
  out.normal_cam = n_cam;
  out.azimuth = wrap_2pi(std::atan2(n_cam.y(), n_cam.x()));
  out.zenith = std::acos(std::clamp(n_cam.z(), 0.0, 1.0));
  if (out.zenith < 1e-12) out.azimuth = 0.0;

  out.dolp = out.label == Reflection::Diffuse
                 ? diffuse_dolp(out.zenith, scene.eta)
                 : specular_dolp(out.zenith, scene.eta);
  out.aolp = out.label == Reflection::Diffuse
                 ? wrap_pi(out.azimuth)
                 : wrap_pi(out.azimuth + 0.5 * kPi);

  static constexpr double kFilterAngles[4] = {0.0, 0.25 * kPi, 0.5 * kPi,
                                              0.75 * kPi};
  for (int c = 0; c < 4; ++c)
    out.channels[c] = 0.5 * out.intensity *
                      (1.0 + out.dolp * std::cos(2.0 * kFilterAngles[c] -
                                                 2.0 * out.aolp));
  return out;
}

RenderResult render_impl(const SyntheticScene& scene, const CameraModel& cam,
                         bool parallel) {
  cam.validate();
  if (scene.surfaces.empty())
    throw std::invalid_argument("render_scene: scene has no surfaces");
  const int w = cam.width, h = cam.height;

  RenderResult r;
  for (auto& ch : r.frame.channels) ch = ImageGrid(w, h);
  r.gt.depth = DepthMap(w, h, scene.z_min, scene.z_max);
  r.gt.normals = NormalMap(w, h);
  r.gt.aolp = ImageGrid(w, h);
  r.gt.dolp = ImageGrid(w, h);
  r.gt.azimuth_true = ImageGrid(w, h);
  r.gt.zenith_true = ImageGrid(w, h);
  r.gt.intensity = ImageGrid(w, h);
  r.gt.reflection.assign(static_cast<size_t>(w) * h, Reflection::Diffuse);
  r.gt.surface_id.assign(static_cast<size_t>(w) * h, -1);
  r.gt.hit = Mask(w, h, false);

  const Pose world_from_cam = cam.pose.inverse();
  std::atomic<long> hits{0};

#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    long row_hits = 0;
    for (int x = 0; x < w; ++x) {
      const PixelSample px = shade_pixel(scene, cam, world_from_cam, x, y);
      const size_t i = static_cast<size_t>(y) * w + x;
      if (px.hit) {
        ++row_hits;
        r.gt.depth.set_depth(x, y, px.depth);
        r.gt.normals.grid.at(x, y, 0) = px.normal_cam.x();
        r.gt.normals.grid.at(x, y, 1) = px.normal_cam.y();
        r.gt.normals.grid.at(x, y, 2) = px.normal_cam.z();
        r.gt.normals.valid.set(x, y, true);
        r.gt.aolp.at(x, y) = px.aolp;
        r.gt.dolp.at(x, y) = px.dolp;
        r.gt.azimuth_true.at(x, y) = px.azimuth;
        r.gt.zenith_true.at(x, y) = px.zenith;
        r.gt.intensity.at(x, y) = px.intensity;
        r.gt.reflection[i] = px.label;
        r.gt.surface_id[i] = px.surface;
        r.gt.hit.set(x, y, true);
        for (int c = 0; c < 4; ++c)
          r.frame.channels[c].at(x, y) = px.channels[c];
      } else if (scene.background_depth > 0.0) {
        r.gt.depth.set_depth(x, y, scene.background_depth);
        r.gt.normals.grid.at(x, y, 2) = 1.0;
        r.gt.normals.valid.set(x, y, true);
      }
    }
    hits += row_hits;
  }
  if (hits.load() == 0)
    throw std::invalid_argument("render_scene: camera sees no surface");
  return r;
}

}  // namespace

double Material::albedo_at(const Eigen::Vector3d& p) const {
  return checker ? checker_value(p, checker_scale, albedo, albedo_b) : albedo;
}

RenderResult render_scene(const SyntheticScene& scene,
                          const CameraModel& cam) {
  return render_impl(scene, cam, true);
}

namespace serial {
RenderResult render_scene(const SyntheticScene& scene,
                          const CameraModel& cam) {
  return render_impl(scene, cam, false);
}
}  // namespace serial

DepthMap sample_sparse_seeds(const GroundTruth& gt, double fraction,
                             double noise_rel, uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("sample_sparse_seeds: fraction out of (0,1]");
  const int w = gt.depth.width(), h = gt.depth.height();
  const size_t m = gt.depth.valid_count();
  if (m == 0) throw std::invalid_argument("sample_sparse_seeds: empty gt");
  const size_t n = static_cast<size_t>(std::ceil(fraction * m));

  // Texture bias: weight by the intensity gradient magnitude.
  ImageGrid gx, gy;
  gradient(gt.intensity, gx, gy);
  double gmax = 0.0;
  for (size_t i = 0; i < gx.values.size(); ++i)
    gmax = std::max(gmax,
                    std::hypot(gx.values[i], gy.values[i]));

  struct Key {
    double key;
    uint32_t pixel;
  };
  std::vector<Key> keys;
  keys.reserve(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(1e-12, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!gt.depth.valid.at(x, y)) continue;
      const double g = std::hypot(gx.at(x, y), gy.at(x, y));
      const double wgt = 1e-3 + (gmax > 0.0 ? g / gmax : 0.0);
      // weighted reservoir key (Efraimidis-Spirakis)
      keys.push_back({std::log(uni(rng)) / wgt,
                      static_cast<uint32_t>(y * w + x)});
    }
  }
  std::nth_element(keys.begin(), keys.begin() + (n - 1), keys.end(),
                   [](const Key& a, const Key& b) {
                     return a.key > b.key || (a.key == b.key && a.pixel < b.pixel);
                   });
  std::vector<uint32_t> chosen(n);
  for (size_t i = 0; i < n; ++i) chosen[i] = keys[i].pixel;
  std::sort(chosen.begin(), chosen.end());

  DepthMap seeds(w, h, gt.depth.z_min, gt.depth.z_max);
  std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (uint32_t pix : chosen) {
    const int x = pix % w, y = pix / w;
    double z = gt.depth.depth(x, y);
    if (noise_rel > 0.0)
      z *= 1.0 + noise_rel * gauss(noise_rng);
    z = std::clamp(z, gt.depth.z_min, gt.depth.z_max);
    seeds.set_depth(x, y, z);
  }
  return seeds;
}

DepthMap simulate_relative_prior(const GroundTruth& gt, const PriorWarp& warp,
                                 const std::vector<double>& surface_bias,
                                 uint64_t /*seed*/) {
  const int w = gt.depth.width(), h = gt.depth.height();
  if (warp.mode == PriorWarp::Mode::Reciprocal) {
    if (warp.a == 0.0 || gt.depth.z_min + warp.b <= 0.0)
      throw std::invalid_argument(
          "simulate_relative_prior: warp is not monotone on the depth range");
  }
  std::vector<double> vals(static_cast<size_t>(w) * h, 0.0);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  Mask valid(w, h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!gt.depth.valid.at(x, y)) continue;
      const double z = gt.depth.depth(x, y);
      double zp = warp.mode == PriorWarp::Mode::Identity
                      ? z
                      : warp.a / (z + warp.b);
      const int sid = gt.surface(x, y);
      if (sid >= 0 && sid < static_cast<int>(surface_bias.size()))
        zp += surface_bias[sid];
      if (zp <= 0.0)
        throw std::invalid_argument(
            "simulate_relative_prior: bias drives prior non-positive");
      vals[static_cast<size_t>(y) * w + x] = zp;
      valid.set(x, y, true);
      lo = std::min(lo, zp);
      hi = std::max(hi, zp);
    }
  }
  if (!(hi > 0.0))
    throw std::invalid_argument("simulate_relative_prior: empty gt");
  DepthMap prior(w, h, lo * 0.999999, hi * 1.000001);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (valid.at(x, y))
        prior.set_depth(x, y, vals[static_cast<size_t>(y) * w + x]);
  return prior;
}

// ---------------------------------------------------------------------------
// JSON scene description

namespace {

using nlohmann::json;

Eigen::Vector3d vec3(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json to_json(const Eigen::Vector3d& v) { return json{v.x(), v.y(), v.z()}; }

Material material_from_json(const json& j) {
  Material m;
  if (j.contains("checker")) {
    m.checker = true;
    m.albedo = j["checker"].at("a").get<double>();
    m.albedo_b = j["checker"].at("b").get<double>();
    m.checker_scale = j["checker"].value("scale", 0.25);
  } else {
    m.albedo = j.value("albedo", 0.7);
  }
  m.ka = j.value("ka", 0.1);
  m.kd = j.value("kd", 0.7);
  m.ks = j.value("ks", 0.0);
  m.shininess = j.value("shininess", 32.0);
  return m;
}

json material_to_json(const Material& m) {
  json j;
  if (m.checker)
    j["checker"] = {{"a", m.albedo}, {"b", m.albedo_b}, {"scale", m.checker_scale}};
  else
    j["albedo"] = m.albedo;
  j["ka"] = m.ka;
  j["kd"] = m.kd;
  j["ks"] = m.ks;
  j["shininess"] = m.shininess;
  return j;
}

}  // namespace

SyntheticScene scene_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  SyntheticScene s;
  s.z_min = j.at("z_min").get<double>();
  s.z_max = j.at("z_max").get<double>();
  s.background_depth = j.value("background_depth", 0.0);
  s.eta = j.value("eta", kDefaultEta);
  s.light.position = vec3(j.at("light").at("position"));
  s.light.radiance = j.at("light").value("radiance", 1.0);
  for (const json& js : j.at("surfaces")) {
    Surface surf;
    const std::string type = js.at("type").get<std::string>();
    if (type == "plane") {
      surf.type = Surface::Type::Plane;
      surf.point = vec3(js.at("point"));
      surf.normal = vec3(js.at("normal"));
      if (js.contains("half_extent")) {
        surf.finite = true;
        surf.half_extent = {js["half_extent"].at(0).get<double>(),
                            js["half_extent"].at(1).get<double>()};
      }
    } else if (type == "sphere") {
      surf.type = Surface::Type::Sphere;
      surf.center = vec3(js.at("center"));
      surf.radius = js.at("radius").get<double>();
    } else if (type == "box") {
      surf.type = Surface::Type::Box;
      surf.bmin = vec3(js.at("min"));
      surf.bmax = vec3(js.at("max"));
    } else {
      throw std::invalid_argument("scene: unknown surface type '" + type + "'");
    }
    surf.material = material_from_json(js.value("material", json::object()));
    s.surfaces.push_back(surf);
  }
  if (s.surfaces.empty())
    throw std::invalid_argument("scene: at least one surface required");
  return s;
}

std::string scene_to_json_text(const SyntheticScene& s) {
  json j;
  j["z_min"] = s.z_min;
  j["z_max"] = s.z_max;
  j["background_depth"] = s.background_depth;
  j["eta"] = s.eta;
  j["light"] = {{"position", to_json(s.light.position)},
                {"radiance", s.light.radiance}};
  j["surfaces"] = json::array();
  for (const Surface& surf : s.surfaces) {
    json js;
    switch (surf.type) {
      case Surface::Type::Plane:
        js["type"] = "plane";
        js["point"] = to_json(surf.point);
        js["normal"] = to_json(surf.normal);
        if (surf.finite)
          js["half_extent"] = {surf.half_extent.x(), surf.half_extent.y()};
        break;
      case Surface::Type::Sphere:
        js["type"] = "sphere";
        js["center"] = to_json(surf.center);
        js["radius"] = surf.radius;
        break;
      case Surface::Type::Box:
        js["type"] = "box";
        js["min"] = to_json(surf.bmin);
        js["max"] = to_json(surf.bmax);
        break;
    }
    js["material"] = material_to_json(surf.material);
    j["surfaces"].push_back(js);
  }
  return j.dump(2);
}

}  // namespace polarec
