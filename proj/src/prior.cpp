#include "polarec/prior.hpp"

#include <cmath>
#include <stdexcept>

#include "polarec/geometry.hpp"

namespace polarec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

PriorField normals_from_prior(const DepthMap& zprime, const CameraModel& cam) {
  if (zprime.width() != cam.width || zprime.height() != cam.height)
    throw std::invalid_argument("normals_from_prior: dimension mismatch");
  const int w = zprime.width(), h = zprime.height();
  PriorField f;
  f.zprime = zprime;
  masked_gradient(zprime.grid, zprime.valid, f.grad_x, f.grad_y, f.valid);
  f.normal = NormalMap(w, h);
  f.zenith_prior = ImageGrid(w, h);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!f.valid.at(x, y)) continue;
      const double gx = f.grad_x.at(x, y);
      const double gy = f.grad_y.at(x, y);
      const double zp = zprime.depth(x, y);
      Eigen::Vector3d n(-cam.f * gx, -cam.f * gy,
                        (x - cam.cx) * gx + (y - cam.cy) * gy + zp);
      const double norm = n.norm();
      if (norm < 1e-12) {
        f.valid.set(x, y, false);
        continue;
      }
      n /= norm;
      // n_z is oriented toward the camera-facing hemisphere (cos(zenith)>=0).
      if (n.z() < 0.0) n = -n;
      f.normal.grid.at(x, y, 0) = n.x();
      f.normal.grid.at(x, y, 1) = n.y();
      f.normal.grid.at(x, y, 2) = n.z();
      f.normal.valid.set(x, y, true);
      const Eigen::Vector3d v = cam.viewer_dir(x, y);
      double c = n.dot(-v);  // viewer vector points opposite the normal side
      c = std::clamp(std::fabs(c), 0.0, 1.0);
      f.zenith_prior.at(x, y) = std::acos(c);
    }
  }
  return f;
}

DepthMap invert_disparity(const DepthMap& disparity) {
  const int w = disparity.width(), h = disparity.height();
  DepthMap out(w, h, 1.0 / disparity.z_max, 1.0 / disparity.z_min);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (disparity.valid.at(x, y))
        out.set_depth(x, y, 1.0 / disparity.depth(x, y));
  return out;
}

PolarCues disambiguate(const PolarMeasurement& meas, const PriorField& field,
                       const DisambiguateOptions& opts) {
  const int w = meas.dolp.width, h = meas.dolp.height;
  if (w != field.zprime.width() || h != field.zprime.height())
    throw std::invalid_argument("disambiguate: dimension mismatch");

  const double gmin =
      opts.gmin_frac * (field.zprime.z_max - field.zprime.z_min);
  PolarCues cues(w, h);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!meas.valid.at(x, y) || !field.valid.at(x, y)) continue;
      const double gx = field.grad_x.at(x, y);
      const double gy = field.grad_y.at(x, y);
      const double gnorm = std::hypot(gx, gy);
      if (gnorm < gmin) continue;  // flat prior: direction is meaningless

      // Image-plane direction of the prior normal: (-gx, -gy) normalized.
      const double prior_dir = std::atan2(-gy, -gx);

      const auto candidates = azimuth_candidates(meas.aolp.at(x, y));
      int best = -1;
      double best_score = 0.0;
      for (int c = 0; c < 4; ++c) {
        const double score =
            angular_distance(candidates[c].angle, prior_dir);
        // Strict improvement required: ties keep the earlier (diffuse-first)
        // candidate.
        if (best < 0 || score < best_score - 1e-9) {
          best = c;
          best_score = score;
        }
      }
      if (best_score > opts.max_alignment) continue;

      const Reflection label = candidates[best].model;
      double zenith;
      if (label == Reflection::Diffuse) {
        zenith = zenith_diffuse(meas.dolp.at(x, y), opts.eta).theta;
      } else {
        const SpecularZenithResult roots =
            zenith_specular(meas.dolp.at(x, y), opts.eta);
        const double zp = field.zenith_prior.at(x, y);
        zenith = std::fabs(roots.lo - zp) <= std::fabs(roots.hi - zp)
                     ? roots.lo
                     : roots.hi;
      }
      cues.azimuth.at(x, y) = candidates[best].angle;
      cues.zenith.at(x, y) = zenith;
      cues.set_label(x, y, label);
      cues.valid.set(x, y, true);
    }
  }
  return cues;
}

}  // namespace polarec
