#include "polarec/polarization.hpp"

#include <cmath>
#include <stdexcept>

namespace polarec {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct StokesPixel {
  double dolp, aolp, intensity;
  bool valid;
};

inline StokesPixel stokes_pixel(double i0, double i45, double i90, double i135,
                                double noise_floor) {
  const double s0 = 0.5 * (i0 + i45 + i90 + i135);
  const double s1 = i0 - i90;
  const double s2 = i45 - i135;
  StokesPixel out{0.0, 0.0, 0.5 * s0, false};
  if (out.intensity < noise_floor || s0 <= 0.0) return out;
  double dolp = std::sqrt(s1 * s1 + s2 * s2) / s0;
  if (dolp > 1.0) dolp = 1.0;
  if (dolp < noise_floor / s0) {
    out.intensity = 0.5 * s0;
    return out;  // unpolarized: AoLP undefined, reported as 0, invalid
  }
  double aolp = 0.5 * std::atan2(s2, s1);
  if (aolp < 0.0) aolp += kPi;
  if (aolp >= kPi) aolp -= kPi;
  out.dolp = dolp;
  out.aolp = aolp;
  out.valid = true;
  return out;
}

}  // namespace

void PolarFrame::validate() const {
  for (int c = 1; c < 4; ++c)
    if (!channels[c].same_size(channels[0]))
      throw std::invalid_argument("PolarFrame: channel dimension mismatch");
  for (const auto& ch : channels)
    for (double v : ch.values)
      if (v < 0.0 || !std::isfinite(v))
        throw std::invalid_argument("PolarFrame: negative channel radiance");
}

PolarMeasurement stokes_from_channels(const PolarFrame& frame,
                                      double noise_floor) {
  frame.validate();
  const int w = frame.width(), h = frame.height();
  PolarMeasurement m;
  m.dolp = ImageGrid(w, h);
  m.aolp = ImageGrid(w, h);
  m.intensity = ImageGrid(w, h);
  m.valid = Mask(w, h, false);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const StokesPixel p =
          stokes_pixel(frame.channels[0].at(x, y), frame.channels[1].at(x, y),
                       frame.channels[2].at(x, y), frame.channels[3].at(x, y),
                       noise_floor);
      m.dolp.at(x, y) = p.dolp;
      m.aolp.at(x, y) = p.aolp;
      m.intensity.at(x, y) = p.intensity;
      m.valid.set(x, y, p.valid);
    }
  }
  return m;
}

namespace serial {
PolarMeasurement stokes_from_channels(const PolarFrame& frame,
                                      double noise_floor) {
  frame.validate();
  const int w = frame.width(), h = frame.height();
  PolarMeasurement m;
  m.dolp = ImageGrid(w, h);
  m.aolp = ImageGrid(w, h);
  m.intensity = ImageGrid(w, h);
  m.valid = Mask(w, h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const StokesPixel p =
          stokes_pixel(frame.channels[0].at(x, y), frame.channels[1].at(x, y),
                       frame.channels[2].at(x, y), frame.channels[3].at(x, y),
                       noise_floor);
      m.dolp.at(x, y) = p.dolp;
      m.aolp.at(x, y) = p.aolp;
      m.intensity.at(x, y) = p.intensity;
      m.valid.set(x, y, p.valid);
    }
  }
  return m;
}
}  // namespace serial

double wrap_2pi(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

double wrap_pi(double a) {
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  return a;
}

double angular_distance(double a, double b) {
  double d = std::fabs(wrap_2pi(a) - wrap_2pi(b));
  if (d > kPi) d = 2.0 * kPi - d;
  return d;
}

std::array<AzimuthCandidate, 4> azimuth_candidates(double aolp) {
  return {AzimuthCandidate{wrap_2pi(aolp), Reflection::Diffuse},
          AzimuthCandidate{wrap_2pi(aolp + kPi), Reflection::Diffuse},
          AzimuthCandidate{wrap_2pi(aolp + 0.5 * kPi), Reflection::Specular},
          AzimuthCandidate{wrap_2pi(aolp + 1.5 * kPi), Reflection::Specular}};
}

double diffuse_dolp(double theta, double eta) {
  const double s = std::sin(theta);
  const double s2 = s * s;
  const double a = eta - 1.0 / eta;
  const double b = eta + 1.0 / eta;
  const double num = a * a * s2;
  const double den = 4.0 * std::cos(theta) * std::sqrt(eta * eta - s2) -
                     b * b * s2 + 2.0 * eta * eta + 2.0;
  return num / den;
}

double specular_dolp(double theta, double eta) {
  const double s = std::sin(theta);
  const double s2 = s * s;
  const double e2 = eta * eta;
  const double num = 2.0 * s2 * std::cos(theta) * std::sqrt(e2 - s2);
  const double den = e2 - s2 - e2 * s2 + 2.0 * s2 * s2;
  return num / den;
}

double diffuse_dolp_max(double eta) { return diffuse_dolp(0.5 * kPi, eta); }

SpecularPeak specular_dolp_peak(double eta) {
  // Golden-section search for the single interior maximum.
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = 0.5 * kPi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = specular_dolp(c, eta), fd = specular_dolp(d, eta);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = specular_dolp(c, eta);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = specular_dolp(d, eta);
    }
  }
  const double t = 0.5 * (a + b);
  return {t, specular_dolp(t, eta)};
}

namespace {

void check_eta(double eta) {
  if (eta < 1.3 || eta > 1.8)
    throw std::invalid_argument("refractive index outside [1.3, 1.8]");
}

// Bisect f on [lo, hi] for f(x) = target, f monotone with the given sense.
double bisect(double (*f)(double, double), double eta, double lo, double hi,
              double target, bool increasing) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid, eta);
    if (std::fabs(v - target) <= 1e-12 && hi - lo < 1e-12) return mid;
    if ((v < target) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ZenithResult zenith_diffuse(double dolp, double eta) {
  check_eta(eta);
  if (dolp < 0.0) throw std::invalid_argument("zenith_diffuse: dolp < 0");
  if (dolp >= diffuse_dolp_max(eta)) return {0.5 * kPi, true};
  if (dolp == 0.0) return {0.0, false};
  return {bisect(&diffuse_dolp, eta, 0.0, 0.5 * kPi, dolp, true), false};
}

SpecularZenithResult zenith_specular(double dolp, double eta) {
  check_eta(eta);
  if (dolp < 0.0) throw std::invalid_argument("zenith_specular: dolp < 0");
  const SpecularPeak peak = specular_dolp_peak(eta);
  if (dolp >= peak.dolp) return {peak.theta, peak.theta, true};
  if (dolp == 0.0) return {0.0, 0.5 * kPi, false};
  const double lo = bisect(&specular_dolp, eta, 0.0, peak.theta, dolp, true);
  const double hi =
      bisect(&specular_dolp, eta, peak.theta, 0.5 * kPi, dolp, false);
  return {lo, hi, false};
}

}  // namespace polarec
