#include "polarec/densify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polarec/eval.hpp"
#include "polarec/geometry.hpp"

namespace polarec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void DensifyConfig::validate() const {
  if (!(consistency_frac > 0.0)) throw std::invalid_argument("consistency_frac must be > 0");
  if (!(azimuth_stop > 0.0)) throw std::invalid_argument("azimuth_stop must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be > 0");
  if (tv_iters < 1) throw std::invalid_argument("tv_iters must be >= 1");
  if (!(convergence_ratio > 0.0 && convergence_ratio < 1.0))
    throw std::invalid_argument("convergence_ratio must be in (0,1)");
  if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
}

DensifyState DensifyState::from_seeds(const DepthMap& seeds) {
  DensifyState s;
  s.depth = seeds;
  s.provenance.assign(seeds.grid.pixel_count(), Provenance::Invalid);
  for (int y = 0; y < seeds.height(); ++y)
    for (int x = 0; x < seeds.width(); ++x)
      if (seeds.valid.at(x, y)) s.set_prov(x, y, Provenance::Seed);
  return s;
}

DepthMap extract_inliers(const DepthMap& z_t, const DepthMap& z_prev,
                         const CameraModel& cam_t,
                         const CameraModel& cam_prev,
                         const DensifyConfig& cfg) {
  cfg.validate();
  if (z_t.width() != cam_t.width || z_t.height() != cam_t.height)
    throw std::invalid_argument("extract_inliers: dimension mismatch");
  const DepthMap reproj = reproject(z_prev, cam_prev, cam_t);
  const double thr = cfg.consistency_frac * (z_t.z_max - z_t.z_min);
  DepthMap out(z_t.width(), z_t.height(), z_t.z_min, z_t.z_max);
  for (int y = 0; y < z_t.height(); ++y)
    for (int x = 0; x < z_t.width(); ++x)
      if (z_t.valid.at(x, y) && reproj.valid.at(x, y) &&
          std::fabs(z_t.depth(x, y) - reproj.depth(x, y)) <= thr)
        out.set_depth(x, y, z_t.depth(x, y));
  return out;
}

namespace {

struct Proposal {
  uint32_t pixel;
  int32_t dist;
  double depth;
};

struct ClaimMap {
  std::vector<int32_t> dist;
  std::vector<int64_t> src;
  std::vector<double> depth;

  explicit ClaimMap(size_t n)
      : dist(n, std::numeric_limits<int32_t>::max()),
        src(n, std::numeric_limits<int64_t>::max()),
        depth(n, 0.0) {}

  void offer(uint32_t pixel, int32_t d, int64_t s, double z) {
    if (d < dist[pixel] || (d == dist[pixel] && s < src[pixel])) {
      dist[pixel] = d;
      src[pixel] = s;
      depth[pixel] = z;
    }
  }
};

inline int step_of(double c) { return static_cast<int>(std::lround(c)); }

// Walk one iso-depth branch from a source pixel, appending proposals for the
// unknown pixels it visits.
void walk_contour(const DensifyState& state, const PolarCues& cues,
                  const DensifyConfig& cfg, int sx, int sy, double dir0,
                  std::vector<Proposal>& out) {
  const int w = state.depth.width(), h = state.depth.height();
  const double z_src = state.depth.depth(sx, sy);
  const int max_steps = 2 * (w + h);
  double dx = std::cos(dir0), dy = std::sin(dir0);
  int cx = sx, cy = sy;
  double prev_azimuth = cues.azimuth.at(sx, sy);
  for (int step = 1; step <= max_steps; ++step) {
    const int nx = cx + step_of(dx);
    const int ny = cy + step_of(dy);
    if (nx == cx && ny == cy) break;
    if (nx < 0 || nx >= w || ny < 0 || ny >= h) break;
    if (!cues.valid.at(nx, ny)) break;
    const double az = cues.azimuth.at(nx, ny);
    if (angular_distance(az, prev_azimuth) > cfg.azimuth_stop) break;
    if (state.prov(nx, ny) == Provenance::Seed) break;
    if (state.prov(nx, ny) == Provenance::Invalid)
      out.push_back({static_cast<uint32_t>(ny * w + nx), step, z_src});
    // follow the contour: iso-depth direction at the new pixel, oriented
    // consistently with the previous step
    double ndx = std::cos(az + 0.5 * kPi), ndy = std::sin(az + 0.5 * kPi);
    if (ndx * dx + ndy * dy < 0.0) {
      ndx = -ndx;
      ndy = -ndy;
    }
    dx = ndx;
    dy = ndy;
    prev_azimuth = az;
    cx = nx;
    cy = ny;
  }
}

void apply_claims(DensifyState& state, const ClaimMap& claims,
                  Provenance prov) {
  const int w = state.depth.width(), h = state.depth.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (claims.dist[i] == std::numeric_limits<int32_t>::max()) continue;
      state.depth.set_depth(x, y, claims.depth[i]);
      state.set_prov(x, y, prov);
    }
  }
}

}  // namespace

void propagate(DensifyState& state, const PolarCues& cues,
               const DensifyConfig& cfg) {
  cfg.validate();
  const int w = state.depth.width(), h = state.depth.height();
  if (cues.width != w || cues.height != h)
    throw std::invalid_argument("propagate: dimension mismatch");

  std::vector<std::vector<Proposal>> proposals(state.depth.grid.pixel_count());
#pragma omp parallel for schedule(dynamic, 8)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (state.prov(x, y) == Provenance::Invalid) continue;
      if (!cues.valid.at(x, y)) continue;
      const double az = cues.azimuth.at(x, y);
      auto& out = proposals[static_cast<size_t>(y) * w + x];
      walk_contour(state, cues, cfg, x, y, az + 0.5 * kPi, out);
      walk_contour(state, cues, cfg, x, y, az - 0.5 * kPi, out);
    }
  }

  // Sequential merge in source order keeps the result independent of the
  // thread count.
  ClaimMap claims(state.depth.grid.pixel_count());
  for (size_t s = 0; s < proposals.size(); ++s)
    for (const Proposal& p : proposals[s])
      claims.offer(p.pixel, p.dist, static_cast<int64_t>(s), p.depth);
  apply_claims(state, claims, Provenance::Propagated);
}

void estimate_along_gradient(DensifyState& state, const PolarCues& cues,
                             const PriorField& field,
                             const DensifyConfig& cfg) {
  cfg.validate();
  const int w = state.depth.width(), h = state.depth.height();
  if (cues.width != w || cues.height != h ||
      field.zprime.width() != w || field.zprime.height() != h)
    throw std::invalid_argument("estimate_along_gradient: dimension mismatch");

  ClaimMap claims(state.depth.grid.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (state.prov(x, y) == Provenance::Invalid) continue;
      if (!cues.valid.at(x, y) || !field.valid.at(x, y)) continue;
      const double zp_prior = field.zprime.depth(x, y);
      if (std::fabs(zp_prior) < 1e-12) continue;
      const double sin_theta = std::sin(cues.zenith.at(x, y));
      const double sin_theta_prior = std::sin(field.zenith_prior.at(x, y));
      if (sin_theta_prior < 1e-6) continue;
      const double ratio = sin_theta / sin_theta_prior;
      const double az = cues.azimuth.at(x, y);
      const double z_p = state.depth.depth(x, y);
      const int64_t src = static_cast<int64_t>(y) * w + x;
      for (int sgn : {+1, -1}) {
        const int nx = x + sgn * step_of(std::cos(az));
        const int ny = y + sgn * step_of(std::sin(az));
        if ((nx == x && ny == y) || nx < 0 || nx >= w || ny < 0 || ny >= h)
          continue;
        if (state.prov(nx, ny) != Provenance::Invalid) continue;
        if (!field.zprime.valid.at(nx, ny)) continue;
        const double dz_prior = field.zprime.depth(nx, ny) - zp_prior;
        const double z_next = (zp_prior + ratio * dz_prior) / zp_prior * z_p;
        if (z_next < state.depth.z_min || z_next > state.depth.z_max) continue;
        claims.offer(static_cast<uint32_t>(ny * w + nx), 1, src, z_next);
      }
    }
  }
  apply_claims(state, claims, Provenance::Estimated);
}

ImageGrid tv_weights(const ImageGrid& image, double zeta) {
  double lo = image.values[0], hi = image.values[0];
  for (double v : image.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  ImageGrid norm(image.width, image.height);
  const double span = hi - lo;
  for (size_t i = 0; i < image.values.size(); ++i)
    norm.values[i] = span > 0.0 ? (image.values[i] - lo) / span : 0.0;
  ImageGrid gx, gy;
  gradient(norm, gx, gy);
  ImageGrid tau(image.width, image.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      tau.at(x, y) = std::exp(-zeta * std::hypot(gx.at(x, y), gy.at(x, y)));
  return tau;
}

double tv_objective(const DepthMap& z, const DepthMap& z0,
                    const ImageGrid& tau, double lambda) {
  const int w = z.width(), h = z.height();
  double data = 0.0, reg = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!z.valid.at(x, y)) continue;
      const double d = z.depth(x, y) - z0.depth(x, y);
      data += 0.5 * d * d;
      // forward differences, only across pairs of valid pixels
      const double dx = (x + 1 < w && z.valid.at(x + 1, y))
                            ? z.depth(x + 1, y) - z.depth(x, y)
                            : 0.0;
      const double dy = (y + 1 < h && z.valid.at(x, y + 1))
                            ? z.depth(x, y + 1) - z.depth(x, y)
                            : 0.0;
      reg += tau.at(x, y) * std::hypot(dx, dy);
    }
  }
  return data + lambda * reg;
}

namespace {

DepthMap tv_smooth_impl(const DepthMap& input, const ImageGrid& tau,
                        double lambda, int iters, bool parallel) {
  if (lambda == 0.0) return input;
  const int w = input.width(), h = input.height();
  if (tau.width != w || tau.height != h)
    throw std::invalid_argument("tv_smooth: weight dimension mismatch");

  DepthMap z = input;
  DepthMap z_prev = input;
  DepthMap z_best = input;
  std::vector<double> zbar = z.grid.values;
  std::vector<double> qx(z.grid.pixel_count(), 0.0);
  std::vector<double> qy(z.grid.pixel_count(), 0.0);

  // ||K|| <= sqrt(8) * max tau, tau <= 1
  const double sigma = 1.0 / std::sqrt(8.0);
  const double step = sigma;

  double best_obj = tv_objective(z, input, tau, lambda);

  auto edge_ok_x = [&](int x, int y) {
    return x + 1 < w && input.valid.at(x, y) && input.valid.at(x + 1, y);
  };
  auto edge_ok_y = [&](int x, int y) {
    return y + 1 < h && input.valid.at(x, y) && input.valid.at(x, y + 1);
  };

  for (int it = 0; it < iters; ++it) {
    // dual ascent + projection onto the lambda-ball
#pragma omp parallel for schedule(static) if (parallel)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        const double t = tau.at(x, y);
        const double gx =
            edge_ok_x(x, y) ? zbar[i + 1] - zbar[i] : 0.0;
        const double gy = edge_ok_y(x, y) ? zbar[i + w] - zbar[i] : 0.0;
        double nqx = qx[i] + sigma * t * gx;
        double nqy = qy[i] + sigma * t * gy;
        const double mag = std::hypot(nqx, nqy);
        if (mag > lambda) {
          nqx *= lambda / mag;
          nqy *= lambda / mag;
        }
        qx[i] = nqx;
        qy[i] = nqy;
      }
    }
    // primal descent with the data-term prox
    z_prev.grid.values = z.grid.values;
#pragma omp parallel for schedule(static) if (parallel)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!input.valid.at(x, y)) continue;
        const size_t i = static_cast<size_t>(y) * w + x;
        // divergence of tau*q (adjoint of the masked forward differences)
        double div = 0.0;
        if (edge_ok_x(x, y)) div += tau.at(x, y) * qx[i];
        if (x > 0 && edge_ok_x(x - 1, y)) div -= tau.at(x - 1, y) * qx[i - 1];
        if (edge_ok_y(x, y)) div += tau.at(x, y) * qy[i];
        if (y > 0 && edge_ok_y(x, y - 1)) div -= tau.at(x, y - 1) * qy[i - w];
        const double znew =
            (z.grid.values[i] + step * div + step * input.grid.values[i]) /
            (1.0 + step);
        z.grid.values[i] = znew;
      }
    }
    // the primal-dual iterates are not monotone in the objective; keep the
    // best one seen so the returned objective never exceeds the input's
    const double obj = tv_objective(z, input, tau, lambda);
    if (obj < best_obj) {
      best_obj = obj;
      z_best.grid.values = z.grid.values;
    }
    // over-relaxed iterate for the next dual step
#pragma omp parallel for schedule(static) if (parallel)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        zbar[i] = 2.0 * z.grid.values[i] - z_prev.grid.values[i];
      }
  }
  return z_best;
}

}  // namespace

DepthMap tv_smooth_depth(const DepthMap& input, const ImageGrid& tau,
                         double lambda, int iters) {
  return tv_smooth_impl(input, tau, lambda, iters, true);
}

namespace serial {
DepthMap tv_smooth_depth(const DepthMap& input, const ImageGrid& tau,
                         double lambda, int iters) {
  return tv_smooth_impl(input, tau, lambda, iters, false);
}
}  // namespace serial

void tv_smooth(DensifyState& state, const ImageGrid& image,
               const DensifyConfig& cfg) {
  cfg.validate();
  const ImageGrid tau = tv_weights(image, cfg.zeta);
  state.depth = tv_smooth_depth(state.depth, tau, cfg.lambda, cfg.tv_iters);
}

namespace {

// Windowed median-absolute-deviation filter for single-view validation.
void validate_median(DensifyState& state, const DensifyConfig& cfg) {
  const int w = state.depth.width(), h = state.depth.height();
  const double thr = cfg.consistency_frac * (state.depth.z_max - state.depth.z_min);
  std::vector<uint8_t> drop(state.depth.grid.pixel_count(), 0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    std::vector<double> window;
    for (int x = 0; x < w; ++x) {
      const Provenance p = state.prov(x, y);
      if (p == Provenance::Invalid || p == Provenance::Seed) continue;
      window.clear();
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          if (state.prov(nx, ny) == Provenance::Invalid) continue;
          window.push_back(state.depth.depth(nx, ny));
        }
      }
      if (window.size() < 5) continue;
      std::sort(window.begin(), window.end());
      const double med = window.size() % 2 == 1
                             ? window[window.size() / 2]
                             : 0.5 * (window[window.size() / 2 - 1] +
                                      window[window.size() / 2]);
      if (std::fabs(state.depth.depth(x, y) - med) > thr)
        drop[static_cast<size_t>(y) * w + x] = 1;
    }
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (drop[static_cast<size_t>(y) * w + x]) {
        state.depth.invalidate(x, y);
        state.set_prov(x, y, Provenance::Invalid);
      }
}

void validate_two_view(DensifyState& state, const TwoViewContext& tv,
                       const DensifyConfig& cfg) {
  const DepthMap reproj = reproject(tv.prev_depth, tv.cam_prev, tv.cam_t);
  const double thr =
      cfg.consistency_frac * (state.depth.z_max - state.depth.z_min);
  const int w = state.depth.width(), h = state.depth.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Provenance p = state.prov(x, y);
      if (p == Provenance::Invalid || p == Provenance::Seed) continue;
      if (!reproj.valid.at(x, y)) continue;  // no second-view evidence
      if (std::fabs(state.depth.depth(x, y) - reproj.depth(x, y)) > thr) {
        state.depth.invalidate(x, y);
        state.set_prov(x, y, Provenance::Invalid);
      }
    }
  }
}

}  // namespace

DensifyResult densify_keyframe(const DepthMap& seeds, const PolarCues& cues,
                               const PriorField& field,
                               const ImageGrid& image,
                               const DensifyConfig& cfg,
                               const TwoViewContext* twoview,
                               const DepthMap* gt) {
  cfg.validate();
  if (seeds.valid_count() == 0)
    throw std::invalid_argument("densify_keyframe: empty seeds");

  DensifyState state = DensifyState::from_seeds(seeds);
  DensifyResult result;
  result.stats.seed_count = seeds.valid_count();

  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    state.iteration = iter;
    const size_t before = state.depth.valid_count();
    propagate(state, cues, cfg);
    estimate_along_gradient(state, cues, field, cfg);
    if (twoview)
      validate_two_view(state, *twoview, cfg);
    else
      validate_median(state, cfg);
    tv_smooth(state, image, cfg);

    const size_t after = state.depth.valid_count();
    const double rel = gt ? absrel(state.depth, *gt)
                          : std::numeric_limits<double>::quiet_NaN();
    result.stats.trace.push_back({iter, after, rel});
    const double ratio =
        after > 0 ? static_cast<double>(after - std::min(before, after)) /
                        static_cast<double>(after)
                  : 0.0;
    if (ratio < cfg.convergence_ratio) {
      result.stats.converged = true;
      break;
    }
  }
  result.depth = std::move(state.depth);
  result.provenance = std::move(state.provenance);
  return result;
}

}  // namespace polarec
