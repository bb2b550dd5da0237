#pragma once

#include <functional>
#include <optional>
#include <span>

#include "lambdatune/rd_curve.hpp"

namespace lambdatune {

struct BdOptions {
  // Below 4 is accepted with a warning; below 2 is rejected.
  std::size_t min_points = 4;
  // Absolute tolerance on the interval-averaged integrand.
  double tolerance = 1e-8;
};

struct OverlapInterval {
  double lo;
  double hi;
};

// Average percent bitrate difference of `test` against `reference` at equal
// MS-SSIM (dB) over the overlapping quality interval. Negative means the
// test curve needs fewer bits.
double bd_rate(const RDCurve& reference, const RDCurve& test, const BdOptions& options = {});

// Average MS-SSIM (dB) difference at equal log-rate. Positive means the test
// curve has higher quality.
double bd_quality(const RDCurve& reference, const RDCurve& test, const BdOptions& options = {});

// Same construction as bd_quality on the VMAF axis. Absent when any point
// lacks a VMAF score.
std::optional<double> bd_vmaf(const RDCurve& reference, const RDCurve& test,
                              const BdOptions& options = {});

// Bitrate change at one QP, in percent of the reference bitrate.
double matched_qp_savings(const RDCurve& reference, const RDCurve& test, int qp);

// Mean of matched_qp_savings over the shared QP ladder.
double mean_matched_savings(const RDCurve& reference, const RDCurve& test);

// Mean of (y_test - y_ref) over the shared x span of two sampled curves,
// integrating the difference of their monotone cubic interpolants.
double mean_interpolated_gap(std::span<const double> ref_x, std::span<const double> ref_y,
                             std::span<const double> test_x, std::span<const double> test_y,
                             double tolerance, OverlapInterval* overlap = nullptr);

}  // namespace lambdatune
