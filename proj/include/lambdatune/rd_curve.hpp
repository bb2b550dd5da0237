#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lambdatune/lambda_model.hpp"

namespace lambdatune {

// -10 * log10(1 - score). Domain: [0, 1).
double msssim_to_db(double score);

// Inverse of msssim_to_db. Domain: db >= 0 (finite).
double db_to_msssim(double db);

// One encode measurement.
struct RDPoint {
  int qp = 0;
  double bitrate_kbps = 0.0;
  double msssim = 0.0;
  double msssim_db = 0.0;
  std::optional<double> vmaf;

  // Fills msssim_db from msssim.
  static RDPoint from_msssim(int qp, double bitrate_kbps, double msssim,
                             std::optional<double> vmaf = std::nullopt);

  friend bool operator==(const RDPoint&, const RDPoint&) = default;
};

struct CurveKey {
  std::string clip_id;
  Codec codec = Codec::AV1;
  double k = 1.0;
  FrameGroup group = FrameGroup::AllFrames;
  Scope scope = Scope::Top;

  friend bool operator==(const CurveKey&, const CurveKey&) = default;
};

// The RD points of one (clip, k) encode configuration, ordered by
// ascending quality. Construction sorts and validates.
class RDCurve {
 public:
  RDCurve() = default;
  RDCurve(CurveKey key, std::vector<RDPoint> points);

  const CurveKey& key() const { return key_; }
  const std::vector<RDPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  const RDPoint* find_qp(int qp) const;

  std::vector<double> quality_db() const;
  std::vector<double> log10_rate() const;

  // Throws InsufficientDataError when fewer than min_points points exist.
  void require_points(std::size_t min_points) const;

  friend bool operator==(const RDCurve&, const RDCurve&) = default;

 private:
  CurveKey key_;
  std::vector<RDPoint> points_;
};

}  // namespace lambdatune
