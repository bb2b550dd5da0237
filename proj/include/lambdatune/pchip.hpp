#pragma once

#include <span>
#include <vector>

namespace lambdatune {

// Monotone piecewise cubic Hermite interpolant. Slopes follow the
// Fritsch-Carlson monotone construction with weighted harmonic-mean
// interior slopes and shape-preserving three-point end slopes, which is the
// variant used by MATLAB and SciPy `pchip`.
class Pchip {
 public:
  // x must be strictly increasing, at least two knots.
  static Pchip fit(std::span<const double> x, std::span<const double> y);

  // No extrapolation: throws ExtrapolationError outside [x.front(), x.back()].
  double eval(double x) const;
  double derivative(double x) const;

  double lower() const { return x_.front(); }
  double upper() const { return x_.back(); }

  const std::vector<double>& knots_x() const { return x_; }
  const std::vector<double>& knots_y() const { return y_; }
  const std::vector<double>& slopes() const { return d_; }

 private:
  Pchip(std::vector<double> x, std::vector<double> y, std::vector<double> d)
      : x_(std::move(x)), y_(std::move(y)), d_(std::move(d)) {}

  std::size_t segment(double x) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace lambdatune
