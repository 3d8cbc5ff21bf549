#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polarec/image.hpp"

namespace polarec {

inline constexpr double kDefaultEta = 1.5;
inline constexpr double kDefaultNoiseFloor = 1e-3;

// The four co-registered polarizer-channel images, in filter-angle order
// 0, 45, 90, 135 degrees. Linear radiance.
struct PolarFrame {
  std::array<ImageGrid, 4> channels;

  int width() const { return channels[0].width; }
  int height() const { return channels[0].height; }
  void validate() const;
};

struct PolarMeasurement {
  ImageGrid dolp;       // [0, 1]
  ImageGrid aolp;       // [0, pi)
  ImageGrid intensity;  // mean of the four channels
  Mask valid;
};

enum class Reflection : uint8_t { Diffuse = 0, Specular = 1 };

// Disambiguated per-pixel normal cues (written by the prior module).
struct PolarCues {
  int width = 0;
  int height = 0;
  ImageGrid azimuth;  // [0, 2pi)
  ImageGrid zenith;   // [0, pi/2]
  std::vector<Reflection> reflection;
  Mask valid;

  PolarCues() = default;
  PolarCues(int w, int h)
      : width(w), height(h), azimuth(w, h), zenith(w, h),
        reflection(static_cast<size_t>(w) * h, Reflection::Diffuse),
        valid(w, h, false) {}

  Reflection label(int x, int y) const {
    return reflection[static_cast<size_t>(y) * width + x];
  }
  void set_label(int x, int y, Reflection r) {
    reflection[static_cast<size_t>(y) * width + x] = r;
  }
};

// Linear Stokes recovery from the four channels:
//   S0 = (I0+I45+I90+I135)/2, S1 = I0-I90, S2 = I45-I135
//   dolp = sqrt(S1^2+S2^2)/S0, aolp = atan2(S2,S1)/2 wrapped to [0,pi)
// Pixels with S0/2 below the noise floor, or dolp below noise_floor/S0,
// are marked invalid.
PolarMeasurement stokes_from_channels(const PolarFrame& frame,
                                      double noise_floor = kDefaultNoiseFloor);

struct AzimuthCandidate {
  double angle;      // [0, 2pi)
  Reflection model;  // the reflection model that produced this candidate
};

// The four azimuth candidates for a measured AoLP: {phi, phi+pi} under the
// diffuse model and {phi+pi/2, phi+3pi/2} under the specular model.
std::array<AzimuthCandidate, 4> azimuth_candidates(double aolp);

// Forward DoLP models, zenith -> dolp, for a dielectric with refractive
// index eta. Diffuse is strictly increasing on [0, pi/2]; specular vanishes
// at both endpoints with a single interior maximum.
double diffuse_dolp(double theta, double eta);
double specular_dolp(double theta, double eta);

// Largest diffuse DoLP (attained at theta = pi/2).
double diffuse_dolp_max(double eta);
// Location and value of the specular DoLP maximum (golden-section search).
struct SpecularPeak {
  double theta;
  double dolp;
};
SpecularPeak specular_dolp_peak(double eta);

struct ZenithResult {
  double theta;
  bool clamped;  // dolp exceeded the attainable range
};

// Invert the diffuse model by bisection. dolp above the model maximum
// saturates to pi/2 with the clamped flag set.
ZenithResult zenith_diffuse(double dolp, double eta);

struct SpecularZenithResult {
  double lo;  // root below the peak
  double hi;  // root above the peak (== lo when clamped)
  bool clamped;
};

// Invert the specular model: two roots bracketing the interior maximum.
SpecularZenithResult zenith_specular(double dolp, double eta);

// Wrap helpers.
double wrap_2pi(double a);              // -> [0, 2pi)
double wrap_pi(double a);               // -> [0, pi)
double angular_distance(double a, double b);  // wrapped |a-b| in [0, pi]

namespace serial {
// Reference implementation of the Stokes recovery, kept deliberately
// independent of the parallel kernel for testing and benchmarking.
PolarMeasurement stokes_from_channels(const PolarFrame& frame,
                                      double noise_floor = kDefaultNoiseFloor);
}  // namespace serial

}  // namespace polarec
