#include "lambdatune/bd_metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"
#include "lambdatune/log.hpp"
#include "lambdatune/pchip.hpp"
#include "lambdatune/quadrature.hpp"

namespace lambdatune {

namespace {

void check_point_floor(const RDCurve& reference, const RDCurve& test, const BdOptions& options) {
  if (options.min_points < 2) {
    throw ConfigError("BD metrics need a point floor of at least 2");
  }
  if (options.min_points < 4) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      log_warning(fmt::format("BD point floor lowered to {}; fewer than 4 points per curve "
                              "makes the integral unreliable",
                              options.min_points));
    }
  }
  reference.require_points(options.min_points);
  test.require_points(options.min_points);
}

std::vector<double> vmaf_scores(const RDCurve& curve) {
  std::vector<double> out;
  for (const auto& p : curve.points()) {
    if (!p.vmaf) return {};
    out.push_back(*p.vmaf);
  }
  return out;
}

}  // namespace

double mean_interpolated_gap(std::span<const double> ref_x, std::span<const double> ref_y,
                             std::span<const double> test_x, std::span<const double> test_y,
                             double tolerance, OverlapInterval* overlap) {
  const Pchip ref = Pchip::fit(ref_x, ref_y);
  const Pchip test = Pchip::fit(test_x, test_y);
  const double lo = std::max(ref.lower(), test.lower());
  const double hi = std::min(ref.upper(), test.upper());
  if (!(lo < hi)) {
    throw NoOverlapError(fmt::format("curves do not overlap: [{}, {}] vs [{}, {}]", ref.lower(),
                                     ref.upper(), test.lower(), test.upper()));
  }
  if (overlap) *overlap = {lo, hi};

  // Integrate knot-to-knot so every panel sees a single cubic on each side.
  std::set<double> cuts{lo, hi};
  for (double x : ref.knots_x()) {
    if (x > lo && x < hi) cuts.insert(x);
  }
  for (double x : test.knots_x()) {
    if (x > lo && x < hi) cuts.insert(x);
  }
  const auto gap = [&](double x) { return test.eval(x) - ref.eval(x); };
  const double width = hi - lo;
  double integral = 0.0;
  for (auto it = cuts.begin(), next = std::next(it); next != cuts.end(); ++it, ++next) {
    integral += adaptive_simpson(gap, *it, *next, tolerance * (*next - *it));
  }
  return integral / width;
}

double bd_rate(const RDCurve& reference, const RDCurve& test, const BdOptions& options) {
  check_point_floor(reference, test, options);
  const auto ref_q = reference.quality_db();
  const auto test_q = test.quality_db();
  const auto ref_r = reference.log10_rate();
  const auto test_r = test.log10_rate();
  const double avg = mean_interpolated_gap(ref_q, ref_r, test_q, test_r, options.tolerance);
  return (std::pow(10.0, avg) - 1.0) * 100.0;
}

double bd_quality(const RDCurve& reference, const RDCurve& test, const BdOptions& options) {
  check_point_floor(reference, test, options);
  const auto ref_r = reference.log10_rate();
  const auto test_r = test.log10_rate();
  const auto ref_q = reference.quality_db();
  const auto test_q = test.quality_db();
  return mean_interpolated_gap(ref_r, ref_q, test_r, test_q, options.tolerance);
}

std::optional<double> bd_vmaf(const RDCurve& reference, const RDCurve& test,
                              const BdOptions& options) {
  check_point_floor(reference, test, options);
  const auto ref_v = vmaf_scores(reference);
  const auto test_v = vmaf_scores(test);
  if (ref_v.empty() || test_v.empty()) return std::nullopt;
  const auto ref_r = reference.log10_rate();
  const auto test_r = test.log10_rate();
  return mean_interpolated_gap(ref_r, ref_v, test_r, test_v, options.tolerance);
}

double matched_qp_savings(const RDCurve& reference, const RDCurve& test, int qp) {
  const RDPoint* ref = reference.find_qp(qp);
  const RDPoint* tst = test.find_qp(qp);
  if (!ref || !tst) {
    throw MissingPointError(fmt::format("QP {} missing from {} curve", qp,
                                        !ref ? "reference" : "test"));
  }
  return (tst->bitrate_kbps - ref->bitrate_kbps) / ref->bitrate_kbps * 100.0;
}

double mean_matched_savings(const RDCurve& reference, const RDCurve& test) {
  std::set<int> ref_qps, test_qps;
  for (const auto& p : reference.points()) ref_qps.insert(p.qp);
  for (const auto& p : test.points()) test_qps.insert(p.qp);
  if (ref_qps != test_qps) {
    throw MismatchError("reference and test curves use different QP ladders");
  }
  double sum = 0.0;
  for (int qp : ref_qps) sum += matched_qp_savings(reference, test, qp);
  return sum / static_cast<double>(ref_qps.size());
}

}  // namespace lambdatune
