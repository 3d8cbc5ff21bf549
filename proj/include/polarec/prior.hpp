#pragma once

#include "polarec/camera.hpp"
#include "polarec/image.hpp"
#include "polarec/polarization.hpp"

namespace polarec {

// Surface cues derived from the relative depth prior.
struct PriorField {
  DepthMap zprime;
  ImageGrid grad_x, grad_y;   // masked gradient of z'
  NormalMap normal;           // n' = [-f gx, -f gy, (x-cx)gx + (y-cy)gy + z'],
                              // normalized
  ImageGrid zenith_prior;     // arccos(n . v), clamped to [0, pi/2]
  Mask valid;
};

// Build normals and prior zenith angles from the relative depthmap.
PriorField normals_from_prior(const DepthMap& zprime, const CameraModel& cam);

// Relative priors expressed in disparity space (larger = closer) must be
// flipped to depth orientation before gradients are taken.
DepthMap invert_disparity(const DepthMap& disparity);

struct DisambiguateOptions {
  double eta = kDefaultEta;
  // Minimum prior gradient magnitude, as a fraction of the prior value range.
  double gmin_frac = 1e-4;
  // Pixels whose best candidate still misaligns by more than this are masked.
  double max_alignment = 0.25 * 3.14159265358979323846;
};

// Select the azimuth branch (and with it the reflection model) whose
// direction best aligns with the prior's projected-normal direction, then
// recover the zenith angle from DoLP under the selected model. For specular
// pixels the root closer to the prior zenith wins.
PolarCues disambiguate(const PolarMeasurement& meas, const PriorField& field,
                       const DisambiguateOptions& opts = {});

}  // namespace polarec
