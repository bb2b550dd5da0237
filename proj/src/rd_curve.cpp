#include "lambdatune/rd_curve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

double msssim_to_db(double score) {
  if (!(score >= 0.0 && score < 1.0)) {
    throw DomainError(fmt::format("MS-SSIM score {} outside [0, 1)", score));
  }
  return -10.0 * std::log10(1.0 - score);
}

double db_to_msssim(double db) {
  if (!(db >= 0.0) || !std::isfinite(db)) {
    throw DomainError(fmt::format("MS-SSIM dB value {} has no score in [0, 1)", db));
  }
  return 1.0 - std::pow(10.0, -db / 10.0);
}

RDPoint RDPoint::from_msssim(int qp, double bitrate_kbps, double msssim,
                             std::optional<double> vmaf) {
  RDPoint p;
  p.qp = qp;
  p.bitrate_kbps = bitrate_kbps;
  p.msssim = msssim;
  p.msssim_db = msssim_to_db(msssim);
  p.vmaf = vmaf;
  return p;
}

RDCurve::RDCurve(CurveKey key, std::vector<RDPoint> points)
    : key_(std::move(key)), points_(std::move(points)) {
  if (points_.size() < 2) {
    throw InsufficientDataError(
        fmt::format("curve '{}' has {} point(s), need at least 2", key_.clip_id, points_.size()));
  }
  std::set<int> qps;
  for (const auto& p : points_) {
    if (!qps.insert(p.qp).second) {
      throw InputError(fmt::format("curve '{}' repeats QP {}", key_.clip_id, p.qp));
    }
    if (!(p.bitrate_kbps > 0.0) || !std::isfinite(p.bitrate_kbps)) {
      throw InputError(fmt::format("curve '{}' QP {}: bitrate must be positive", key_.clip_id, p.qp));
    }
    if (!std::isfinite(p.msssim_db)) {
      throw InputError(fmt::format("curve '{}' QP {}: quality is not finite", key_.clip_id, p.qp));
    }
  }
  std::sort(points_.begin(), points_.end(),
            [](const RDPoint& a, const RDPoint& b) { return a.msssim_db < b.msssim_db; });
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& lo = points_[i - 1];
    const auto& hi = points_[i];
    if (!(hi.msssim_db > lo.msssim_db)) {
      throw InputError(fmt::format("curve '{}': QPs {} and {} have equal quality", key_.clip_id,
                                   lo.qp, hi.qp));
    }
    if (!(hi.bitrate_kbps > lo.bitrate_kbps)) {
      throw InputError(fmt::format(
          "curve '{}': bitrate does not increase with quality between QPs {} and {}",
          key_.clip_id, lo.qp, hi.qp));
    }
  }
}

const RDPoint* RDCurve::find_qp(int qp) const {
  auto it = std::find_if(points_.begin(), points_.end(),
                         [qp](const RDPoint& p) { return p.qp == qp; });
  return it == points_.end() ? nullptr : &*it;
}

std::vector<double> RDCurve::quality_db() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.msssim_db);
  return out;
}

std::vector<double> RDCurve::log10_rate() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(std::log10(p.bitrate_kbps));
  return out;
}

void RDCurve::require_points(std::size_t min_points) const {
  if (points_.size() < min_points) {
    throw InsufficientDataError(fmt::format("curve '{}' has {} points, need at least {}",
                                            key_.clip_id, points_.size(), min_points));
  }
}

}  // namespace lambdatune
