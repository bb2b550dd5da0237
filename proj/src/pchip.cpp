#include "lambdatune/pchip.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Three-point end slope, limited so the end segment keeps the data's shape.
double end_slope(double h0, double h1, double m0, double m1) {
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) {
    d = 0.0;
  } else if (sign(m0) != sign(m1) && std::abs(d) > 3.0 * std::abs(m0)) {
    d = 3.0 * m0;
  }
  return d;
}

}  // namespace

Pchip Pchip::fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError(fmt::format("pchip: {} x values but {} y values", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) throw InputError("pchip: need at least two knots");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InputError("pchip: knots must be finite");
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw InputError(fmt::format("pchip: x not strictly increasing at index {}", i));
    }
  }

  std::vector<double> h(n - 1), m(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    m[i] = (y[i + 1] - y[i]) / h[i];
  }

  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = m[0];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (m[i - 1] * m[i] <= 0.0) continue;
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
    }
    d[0] = end_slope(h[0], h[1], m[0], m[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }
  return Pchip({x.begin(), x.end()}, {y.begin(), y.end()}, std::move(d));
}

std::size_t Pchip::segment(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) {
    throw ExtrapolationError(
        fmt::format("pchip: {} outside knot span [{}, {}]", x, x_.front(), x_.back()));
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  auto i = static_cast<std::size_t>(std::distance(x_.begin(), it));
  return std::min(i == 0 ? 0 : i - 1, x_.size() - 2);
}

double Pchip::eval(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double Pchip::derivative(double x) const {
  const std::size_t i = segment(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double dh00 = (6.0 * t2 - 6.0 * t) / h;
  const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
  const double dh11 = 3.0 * t2 - 2.0 * t;
  return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

}  // namespace lambdatune
