#include "doctest.h"

#include <cmath>

#include "lambdatune/bd_metrics.hpp"
#include "lambdatune/errors.hpp"
#include "support.hpp"

using namespace lambdatune;
using testsupport::make_curve;
using testsupport::Rng;

namespace {

RDCurve scaled_rate(const RDCurve& curve, double factor, double k = 1.0) {
  std::vector<int> qps;
  std::vector<double> rates, dbs;
  for (const auto& p : curve.points()) {
    qps.push_back(p.qp);
    rates.push_back(p.bitrate_kbps * factor);
    dbs.push_back(p.msssim_db);
  }
  return make_curve(qps, rates, dbs, k);
}

RDCurve shifted_quality(const RDCurve& curve, double offset) {
  std::vector<int> qps;
  std::vector<double> rates, dbs;
  for (const auto& p : curve.points()) {
    qps.push_back(p.qp);
    rates.push_back(p.bitrate_kbps);
    dbs.push_back(p.msssim_db + offset);
  }
  return make_curve(qps, rates, dbs);
}

const RDCurve& ladder_curve() {
  static const RDCurve curve =
      make_curve({27, 39, 49, 59, 63}, {3000, 1100, 420, 160, 110}, {18.0, 14.2, 11.1, 8.2, 7.0});
  return curve;
}

}  // namespace

TEST_SUITE("bd_metrics") {
  TEST_CASE("identical curves give zero") {
    const auto& a = ladder_curve();
    CHECK(std::fabs(bd_rate(a, a)) < 1e-9);
    CHECK(std::fabs(bd_quality(a, a)) < 1e-9);
    CHECK(matched_qp_savings(a, a, 39) == 0.0);
    CHECK(mean_matched_savings(a, a) == 0.0);
  }

  TEST_CASE("uniform rate inflation") {
    const auto& a = ladder_curve();
    const auto b = scaled_rate(a, 1.10);
    CHECK(std::fabs(bd_rate(a, b) - 10.0) < 1e-3);
    CHECK(std::fabs(mean_matched_savings(a, b) - 10.0) < 1e-9);
    CHECK(std::fabs(matched_qp_savings(a, b, 27) - 10.0) < 1e-9);
  }

  TEST_CASE("uniform quality offset") {
    const auto& a = ladder_curve();
    const auto b = shifted_quality(a, 0.5);
    CHECK(std::fabs(bd_quality(a, b) - 0.5) < 1e-3);
    CHECK(bd_rate(a, b) < 0.0);
  }

  TEST_CASE("matched qp savings") {
    const auto ref = make_curve({27, 39, 49, 59}, {1000, 800, 500, 200}, {18, 15, 12, 9});
    const auto test = make_curve({27, 39, 49, 59}, {1100, 283.2, 200, 100}, {18, 15, 12, 9});
    CHECK(matched_qp_savings(ref, test, 27) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(matched_qp_savings(ref, test, 39) == doctest::Approx(-64.6).epsilon(1e-12));
    CHECK_THROWS_AS(matched_qp_savings(ref, test, 63), MissingPointError);

    const auto five = make_curve({1, 2, 3, 4, 5}, {100, 90, 80, 70, 60}, {20, 18, 16, 14, 12});
    const auto cut = make_curve({1, 2, 3, 4, 5}, {90, 72, 56, 42, 30}, {20, 18, 16, 14, 12});
    CHECK(mean_matched_savings(five, cut) == doctest::Approx(-30.0).epsilon(1e-12));

    const auto other = make_curve({1, 2, 3, 6}, {100, 90, 80, 70}, {20, 18, 16, 14});
    CHECK_THROWS_AS(mean_matched_savings(five, other), MismatchError);
  }

  TEST_CASE("errors: overlap and point floor") {
    const auto low = make_curve({1, 2, 3, 4}, {100, 80, 60, 40}, {10, 9, 8, 7});
    const auto high = make_curve({1, 2, 3, 4}, {100, 80, 60, 40}, {20, 19, 18, 17});
    CHECK_THROWS_AS(bd_rate(low, high), NoOverlapError);
    const auto three = make_curve({1, 2, 3}, {100, 80, 60}, {10, 9, 8});
    CHECK_THROWS_AS(bd_rate(three, three), InsufficientDataError);
    BdOptions relaxed;
    relaxed.min_points = 3;
    CHECK(std::fabs(bd_rate(three, three, relaxed)) < 1e-12);
    relaxed.min_points = 1;
    CHECK_THROWS_AS(bd_rate(three, three, relaxed), ConfigError);
  }

  TEST_CASE("dense-sampling oracle on random curve pairs") {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const auto a = testsupport::random_curve(rng, rng.integer(4, 6));
      const auto b = testsupport::random_curve(rng, rng.integer(4, 6));
      const auto sa = testsupport::samples_of(a), sb = testsupport::samples_of(b);
      if (std::max(sa.quality_db.front(), sb.quality_db.front()) >=
          std::min(sa.quality_db.back(), sb.quality_db.back())) {
        CHECK_THROWS_AS(bd_rate(a, b), NoOverlapError);
        continue;
      }
      CAPTURE(trial);
      CHECK(std::fabs(bd_rate(a, b) - testsupport::oracle_bd_rate(sa, sb)) < 1e-4);
      if (std::max(sa.log10_rate.front(), sb.log10_rate.front()) >=
          std::min(sa.log10_rate.back(), sb.log10_rate.back())) {
        CHECK_THROWS_AS(bd_quality(a, b), NoOverlapError);
      } else {
        CHECK(std::fabs(bd_quality(a, b) - testsupport::oracle_bd_quality(sa, sb)) < 1e-4);
      }
    }
  }

  TEST_CASE("reciprocity and scale equivariance") {
    Rng rng(29);
    int checked = 0;
    while (checked < 100) {
      const auto a = testsupport::random_curve(rng, rng.integer(4, 6));
      const auto b = testsupport::random_curve(rng, rng.integer(4, 6));
      double ab = 0.0;
      try {
        ab = bd_rate(a, b);
      } catch (const NoOverlapError&) {
        continue;
      }
      ++checked;
      const double ba = bd_rate(b, a);
      CHECK(std::fabs((1 + ab / 100) * (1 + ba / 100) - 1.0) < 1e-6);
      const double c = rng.log_uniform(1e-3, 1e3);
      CHECK(std::fabs(bd_rate(scaled_rate(a, c), scaled_rate(b, c)) - ab) < 1e-9);
    }
  }

  TEST_CASE("vmaf companion metric") {
    const auto& a = ladder_curve();
    CHECK_FALSE(bd_vmaf(a, a).has_value());
    std::vector<RDPoint> pts;
    for (auto p : a.points()) {
      p.vmaf = 4.0 * p.msssim_db;
      pts.push_back(p);
    }
    const RDCurve with_vmaf(a.key(), pts);
    for (auto& p : pts) *p.vmaf += 2.0;
    const RDCurve shifted(a.key(), pts);
    REQUIRE(bd_vmaf(with_vmaf, shifted).has_value());
    CHECK(std::fabs(*bd_vmaf(with_vmaf, shifted) - 2.0) < 1e-6);
  }
}
