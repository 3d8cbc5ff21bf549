#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "polarec/camera.hpp"
#include "polarec/image.hpp"
#include "polarec/polarization.hpp"
#include "polarec/prior.hpp"

namespace polarec {

struct DensifyConfig {
  double consistency_frac = 0.01;  // inlier threshold, fraction of depth range
  double azimuth_stop = 3.14159265358979323846 / 6.0;
  double lambda = 0.3;             // TV regularization weight
  double zeta = 3.0;               // image-gradient weight sharpness
  int tv_iters = 3;
  double convergence_ratio = 0.1;
  int max_outer_iters = 20;

  void validate() const;
};

enum class Provenance : uint8_t {
  Invalid = 0,
  Seed = 1,
  Propagated = 2,
  Estimated = 3,
  SmoothedOnly = 4,
};

struct DensifyState {
  DepthMap depth;
  std::vector<Provenance> provenance;
  int iteration = 0;

  static DensifyState from_seeds(const DepthMap& seeds);
  Provenance prov(int x, int y) const {
    return provenance[static_cast<size_t>(y) * depth.width() + x];
  }
  void set_prov(int x, int y, Provenance p) {
    provenance[static_cast<size_t>(y) * depth.width() + x] = p;
  }
};

// Two-view consistency filter: keep pixels of z_t whose depth agrees with the
// reprojection of z_prev to within consistency_frac * (z_max - z_min).
DepthMap extract_inliers(const DepthMap& z_t, const DepthMap& z_prev,
                         const CameraModel& cam_t,
                         const CameraModel& cam_prev,
                         const DensifyConfig& cfg);

// Transport known depths along the iso-depth directions +-(azimuth + pi/2),
// stopping at borders, invalid cues, seeds, and azimuth jumps beyond the
// stop threshold. Conflicts resolve by shorter walk, then smaller source
// index; the result is independent of thread count.
void propagate(DensifyState& state, const PolarCues& cues,
               const DensifyConfig& cfg);

// One-pixel steps along +-azimuth using the zenith-scaled prior gradient:
//   z_next = (z' + (sin th / sin th') * dz') / z' * z_p
void estimate_along_gradient(DensifyState& state, const PolarCues& cues,
                             const PriorField& field,
                             const DensifyConfig& cfg);

// Edge-aware TV weights tau_p = exp(-zeta * |grad I_p|), image pre-normalized
// to [0, 1].
ImageGrid tv_weights(const ImageGrid& image, double zeta);

// Weighted-TV objective 0.5||z - z0||^2 + lambda * sum tau|grad z|
// restricted to valid pixels.
double tv_objective(const DepthMap& z, const DepthMap& z0,
                    const ImageGrid& tau, double lambda);

// Primal-dual smoothing of the known depths with a monotone safeguard: the
// returned objective sequence never increases.
DepthMap tv_smooth_depth(const DepthMap& input, const ImageGrid& tau,
                         double lambda, int iters);

void tv_smooth(DensifyState& state, const ImageGrid& image,
               const DensifyConfig& cfg);

// Optional second view for the in-loop validation step.
struct TwoViewContext {
  DepthMap prev_depth;
  CameraModel cam_prev;
  CameraModel cam_t;
};

struct DensifyStats {
  struct IterTrace {
    int iteration;
    size_t points;
    double absrel;  // NaN when no ground truth supplied
  };
  size_t seed_count = 0;
  std::vector<IterTrace> trace;
  bool converged = false;
};

struct DensifyResult {
  DepthMap depth;
  std::vector<Provenance> provenance;
  DensifyStats stats;
};

DensifyResult densify_keyframe(const DepthMap& seeds, const PolarCues& cues,
                               const PriorField& field,
                               const ImageGrid& image,
                               const DensifyConfig& cfg,
                               const TwoViewContext* twoview = nullptr,
                               const DepthMap* gt = nullptr);

namespace serial {
DepthMap tv_smooth_depth(const DepthMap& input, const ImageGrid& tau,
                         double lambda, int iters);
}

}  // namespace polarec
