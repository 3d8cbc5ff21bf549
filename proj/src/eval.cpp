#include "polarec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polarec {

double absrel(const DepthMap& z, const DepthMap& z_gt) {
  if (z.width() != z_gt.width() || z.height() != z_gt.height())
    throw std::invalid_argument("absrel: dimension mismatch");
  double sum = 0.0;
  size_t n = 0;
  for (int y = 0; y < z.height(); ++y) {
    for (int x = 0; x < z.width(); ++x) {
      if (!z.valid.at(x, y) || !z_gt.valid.at(x, y)) continue;
      sum += std::fabs(z.depth(x, y) - z_gt.depth(x, y)) / z_gt.depth(x, y);
      ++n;
    }
  }
  if (n == 0) throw std::runtime_error("absrel: no co-valid pixels");
  return sum / static_cast<double>(n);
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

// Weighted least-squares plane through the weighted centroid.
bool fit_plane(const std::vector<Eigen::Vector3d>& pts,
               const std::vector<double>& weights, Eigen::Vector3d& n,
               double& d) {
  double wsum = 0.0;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    centroid += weights[i] * pts[i];
    wsum += weights[i];
  }
  if (wsum <= 0.0) return false;
  centroid /= wsum;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < pts.size(); ++i) {
    const Eigen::Vector3d q = pts[i] - centroid;
    cov += weights[i] * q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.info() != Eigen::Success) return false;
  // smallest eigenvalue must be isolated from a rank-1 (collinear) set
  if (es.eigenvalues()(1) < 1e-12 * std::max(es.eigenvalues()(2), 1.0))
    return false;
  n = es.eigenvectors().col(0).normalized();
  d = n.dot(centroid);
  return true;
}

}  // namespace

std::map<int, PlaneCurve> plane_accuracy(
    const std::vector<Eigen::Vector3d>& points, const std::vector<int>& labels,
    const std::vector<double>& thresholds) {
  if (points.size() != labels.size())
    throw std::invalid_argument("plane_accuracy: points/labels size mismatch");
  std::vector<double> sorted_t = thresholds;
  std::sort(sorted_t.begin(), sorted_t.end());

  std::map<int, std::vector<Eigen::Vector3d>> groups;
  for (size_t i = 0; i < points.size(); ++i)
    groups[labels[i]].push_back(points[i]);

  std::map<int, PlaneCurve> out;
  for (auto& [label, pts] : groups) {
    PlaneCurve curve;
    curve.thresholds = sorted_t;
    if (pts.size() < 3) {
      curve.degenerate = true;
      out[label] = curve;
      continue;
    }
    std::vector<double> w(pts.size(), 1.0);
    Eigen::Vector3d n;
    double d = 0.0;
    bool ok = fit_plane(pts, w, n, d);
    for (int round = 0; ok && round < 3; ++round) {
      std::vector<double> res(pts.size());
      for (size_t i = 0; i < pts.size(); ++i)
        res[i] = std::fabs(n.dot(pts[i]) - d);
      const double cutoff = 3.0 * std::max(median_of(res), 1e-12);
      for (size_t i = 0; i < pts.size(); ++i) {
        const double r = res[i] / cutoff;
        w[i] = r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0;  // Tukey
      }
      ok = fit_plane(pts, w, n, d);
    }
    if (!ok) {
      curve.degenerate = true;
      out[label] = curve;
      continue;
    }
    curve.normal = n;
    curve.offset = d;
    curve.inlier_fraction.resize(sorted_t.size());
    for (size_t k = 0; k < sorted_t.size(); ++k) {
      size_t inliers = 0;
      for (const auto& p : pts)
        if (std::fabs(n.dot(p) - d) <= sorted_t[k]) ++inliers;
      curve.inlier_fraction[k] =
          static_cast<double>(inliers) / static_cast<double>(pts.size());
    }
    out[label] = curve;
  }
  return out;
}

}  // namespace polarec
