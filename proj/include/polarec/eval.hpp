#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "polarec/image.hpp"

namespace polarec {

// Mean absolute relative error over pixels valid in both maps.
double absrel(const DepthMap& z, const DepthMap& z_gt);

struct PlaneCurve {
  bool degenerate = false;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  double offset = 0.0;  // plane: normal . x = offset
  std::vector<double> thresholds;
  std::vector<double> inlier_fraction;  // monotone non-decreasing
};

// Robust plane fit per label (3 Tukey reweighting rounds, cutoff at 3x the
// median absolute residual), then the fraction of points within each
// distance threshold.
std::map<int, PlaneCurve> plane_accuracy(
    const std::vector<Eigen::Vector3d>& points, const std::vector<int>& labels,
    const std::vector<double>& thresholds);

struct EvalReport {
  double absrel = 0.0;
  size_t valid_count = 0;
  std::map<int, PlaneCurve> plane_curves;
};

}  // namespace polarec
