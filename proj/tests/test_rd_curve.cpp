#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "lambdatune/errors.hpp"
#include "lambdatune/pchip.hpp"
#include "lambdatune/rd_curve.hpp"
#include "support.hpp"

using namespace lambdatune;
using testsupport::MonotoneCubic;
using testsupport::Rng;

TEST_SUITE("rd_curve") {
  TEST_CASE("msssim dB mapping") {
    CHECK(msssim_to_db(0.9) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(msssim_to_db(0.99) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(msssim_to_db(0.999) == doctest::Approx(30.0).epsilon(1e-13));
    CHECK(msssim_to_db(0.0) == 0.0);
    CHECK_THROWS_AS(msssim_to_db(1.0), DomainError);
    CHECK_THROWS_AS(msssim_to_db(-0.1), DomainError);
    double previous = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double score = i / 1000.0;
      const double db = msssim_to_db(score);
      CHECK(db > previous);
      previous = db;
      CHECK(db_to_msssim(db) == doctest::Approx(score).epsilon(1e-12));
    }
  }

  TEST_CASE("curve invariants") {
    const auto curve = testsupport::make_curve({39, 27, 49, 63, 59}, {900, 3000, 300, 60, 100},
                                               {14, 18, 11, 6, 8});
    REQUIRE(curve.size() == 5);
    for (std::size_t i = 1; i < curve.size(); ++i) {
      CHECK(curve.points()[i].msssim_db > curve.points()[i - 1].msssim_db);
    }
    CHECK(curve.find_qp(39)->bitrate_kbps == 900);
    CHECK(curve.find_qp(40) == nullptr);

    CHECK_THROWS_AS(testsupport::make_curve({27}, {100}, {10}), InsufficientDataError);
    CHECK_THROWS_AS(testsupport::make_curve({27, 27}, {100, 200}, {10, 12}), InputError);
    CHECK_THROWS_AS(testsupport::make_curve({27, 39}, {100, 0}, {12, 10}), InputError);
    CHECK_THROWS_AS(testsupport::make_curve({27, 39}, {200, 100}, {10, 10}), InputError);
    // Quality rises while rate falls: not a monotone RD curve.
    CHECK_THROWS_AS(testsupport::make_curve({27, 39}, {100, 200}, {12, 10}), InputError);
    CHECK_THROWS_AS(curve.require_points(6), InsufficientDataError);
  }
}

TEST_SUITE("pchip") {
  TEST_CASE("collinear data reproduces the line") {
    const std::vector<double> x{1, 2, 3}, y{1, 2, 3};
    const auto f = Pchip::fit(x, y);
    CHECK(f.eval(2.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(f.eval(1.5) == doctest::Approx(1.5).epsilon(1e-15));
  }

  TEST_CASE("matches frozen reference values") {
    const std::vector<double> x{0, 1, 2, 3}, y{0, 10, 10.1, 20};
    const auto f = Pchip::fit(x, y);
    const std::vector<double> qx{0.25, 0.5, 0.75, 1.5, 2.2, 2.9};
    const std::vector<double> expected{3.6555615717821777, 6.843997524752475, 9.110434715346534,
                                       10.050002475247526, 10.681344000000001, 18.525782};
    for (std::size_t i = 0; i < qx.size(); ++i) {
      CHECK(f.eval(qx[i]) == doctest::Approx(expected[i]).epsilon(1e-12));
    }
    const std::vector<double> slopes{14.95, 0.19801980198019734, 0.1979999999999993,
                                     14.800000000000002};
    for (std::size_t i = 0; i < slopes.size(); ++i) {
      CHECK(f.slopes()[i] == doctest::Approx(slopes[i]).epsilon(1e-12));
    }

    const std::vector<double> x2{1, 2, 4, 5, 7}, y2{1, 3, 3.5, 8, 9};
    const auto g = Pchip::fit(x2, y2);
    CHECK(g.eval(1.3) == doctest::Approx(1.7811013513513514).epsilon(1e-12));
    CHECK(g.eval(3.0) == doctest::Approx(3.240128115128115).epsilon(1e-12));
    CHECK(g.eval(4.5) == doctest::Approx(5.692271143490656).epsilon(1e-12));
    CHECK(g.eval(6.1) == doctest::Approx(8.794783536585365).epsilon(1e-12));
  }

  TEST_CASE("agrees with the independent oracle on the 4-point dataset") {
    const std::vector<double> x{0, 1, 2, 3}, y{0, 10, 10.1, 20};
    const auto f = Pchip::fit(x, y);
    const MonotoneCubic oracle(x, y);
    for (int i = 0; i <= 3000; ++i) {
      const double q = 3.0 * i / 3000.0;
      CHECK(std::fabs(f.eval(q) - oracle(q)) < 1e-9);
    }
  }

  TEST_CASE("random datasets: oracle agreement and knot interpolation") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = rng.integer(2, 8);
      const auto x = rng.increasing(n, rng.uniform(-5, 5), 0.05, 3.0);
      std::vector<double> y;
      for (int i = 0; i < n; ++i) y.push_back(rng.uniform(-10, 10));
      const auto f = Pchip::fit(x, y);
      const MonotoneCubic oracle(x, y);
      for (int i = 0; i < n; ++i) CHECK(std::fabs(f.eval(x[i]) - y[i]) <= 1e-12);
      for (int s = 0; s <= 200; ++s) {
        const double q = std::min(x.back(), x.front() + (x.back() - x.front()) * s / 200.0);
        CHECK(std::fabs(f.eval(q) - oracle(q)) < 1e-9 * (1.0 + std::fabs(oracle(q))));
      }
    }
  }

  TEST_CASE("monotone data keeps a one-signed derivative") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = rng.integer(3, 8);
      const auto x = rng.increasing(n, 0.0, 0.01, 2.0);
      const bool increasing = trial % 2 == 0;
      auto y = rng.increasing(n, rng.uniform(-3, 3), 0.0, 5.0);
      if (!increasing) std::reverse(y.begin(), y.end());
      const auto f = Pchip::fit(x, y);
      double prev = f.eval(x.front());
      for (int s = 1; s <= 10000; ++s) {
        const double q = std::min(x.back(), x.front() + (x.back() - x.front()) * s / 10000.0);
        const double v = f.eval(q);
        const double d = f.derivative(q);
        if (increasing) {
          CHECK(d >= -1e-12);
          CHECK(v >= prev - 1e-12);
        } else {
          CHECK(d <= 1e-12);
          CHECK(v <= prev + 1e-12);
        }
        prev = v;
      }
    }
  }

  TEST_CASE("first derivative is continuous at interior knots") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = rng.integer(3, 7);
      const auto x = rng.increasing(n, 0.0, 0.2, 2.0);
      std::vector<double> y;
      for (int i = 0; i < n; ++i) y.push_back(rng.uniform(-5, 5));
      const auto f = Pchip::fit(x, y);
      for (int i = 1; i + 1 < n; ++i) {
        // Second-order one-sided differences from each neighbouring segment.
        const double h = 1e-5;
        const double left = (3 * f.eval(x[i]) - 4 * f.eval(x[i] - h) + f.eval(x[i] - 2 * h)) / (2 * h);
        const double right = (-3 * f.eval(x[i]) + 4 * f.eval(x[i] + h) - f.eval(x[i] + 2 * h)) / (2 * h);
        const double scale = std::max({std::fabs(left), std::fabs(right), 1.0});
        CHECK(std::fabs(left - right) / scale < 1e-6);
      }
    }
  }

  TEST_CASE("rejects bad knots and extrapolation") {
    const std::vector<double> dup{0, 1, 1}, y3{0, 1, 2};
    CHECK_THROWS_AS(Pchip::fit(dup, y3), InputError);
    const std::vector<double> unordered{0, 2, 1};
    CHECK_THROWS_AS(Pchip::fit(unordered, y3), InputError);
    const std::vector<double> one{0}, y1{1};
    CHECK_THROWS_AS(Pchip::fit(one, y1), InputError);
    const std::vector<double> x{0, 1, 2};
    const auto f = Pchip::fit(x, y3);
    CHECK_THROWS_AS(f.eval(-1e-9), ExtrapolationError);
    CHECK_THROWS_AS(f.eval(2.0 + 1e-9), ExtrapolationError);
    CHECK_NOTHROW(f.eval(2.0));
  }
}
