#include "lambdatune/scalar_opt.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "lambdatune/errors.hpp"

namespace lambdatune {

namespace {

constexpr double kGoldenRatio = 1.618033988749895;
constexpr double kGoldenSection = 0.3819660112501051;  // 2 - phi
constexpr double kTinyDenominator = 1e-21;

double checked(const Objective& f, double x) {
  const double fx = f(x);
  if (std::isnan(fx)) throw DomainError(fmt::format("objective returned NaN at x = {}", x));
  return fx;
}

}  // namespace

Bracket::Bracket(double a_, double b_, double c_, double fa_, double fb_, double fc_)
    : a(a_), b(b_), c(c_), fa(fa_), fb(fb_), fc(fc_) {
  if (!(a < b && b < c)) {
    throw BracketError(fmt::format("bracket points not ordered: {} {} {}", a, b, c));
  }
  if (!(fb < fa && fb < fc)) {
    throw BracketError(
        fmt::format("f({}) = {} is not below both ends ({}, {})", b, fb, fa, fc));
  }
}

void OptimizerConfig::validate() const {
  if (!(xtol > 0.0)) throw ConfigError(fmt::format("xtol must be positive, got {}", xtol));
  if (max_iters < 3) throw ConfigError(fmt::format("max_iters must be >= 3, got {}", max_iters));
}

Bracket bracket_minimum(const Objective& f, double x0, double x1, int max_expansions,
                        SearchLimits limits) {
  if (x0 == x1) throw BracketError("bracket seeds must differ");
  const auto clamp = [&](double x) { return std::min(std::max(x, limits.lower), limits.upper); };

  double a = x0, b = x1;
  double fa = checked(f, a);
  double fb = checked(f, b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = clamp(b + kGoldenRatio * (b - a));
  double fc = checked(f, c);
  int expansions = 0;
  while (fc <= fb) {
    if (c == limits.lower || c == limits.upper) {
      throw BracketError(fmt::format("objective still decreasing at search limit {}", c));
    }
    if (++expansions > max_expansions) {
      throw BracketError(fmt::format("no bracket after {} expansions", max_expansions));
    }
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    c = clamp(b + kGoldenRatio * (b - a));
    fc = checked(f, c);
  }
  if (!(fb < fa)) throw BracketError("objective is flat at the bracket seeds");
  if (a > c) {
    std::swap(a, c);
    std::swap(fa, fc);
  }
  return Bracket(a, b, c, fa, fb, fc);
}

Minimum brent_minimize(const Objective& f, const Bracket& bracket, const OptimizerConfig& config) {
  config.validate();
  double a = bracket.a;
  double b = bracket.c;
  double x = bracket.b, w = x, v = x;
  double fx = bracket.fb, fw = fx, fv = fx;
  double d = 0.0, e = 0.0;

  OptimizerTrace trace;
  trace.evaluations.push_back({x, fx});

  const double tol1 = config.xtol;
  const double tol2 = 2.0 * tol1;
  const auto done = [&] { return std::abs(x - 0.5 * (a + b)) <= tol2 - 0.5 * (b - a); };

  while (!done()) {
    if (trace.iterations >= config.max_iters) {
      return {x, fx, std::move(trace)};
    }
    trace.interval_widths.push_back(b - a);
    const double xm = 0.5 * (a + b);
    bool golden = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (q >= kTinyDenominator && std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) &&
          p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
        golden = false;
      }
    }
    if (golden) {
      e = (x >= xm) ? a - x : b - x;
      d = kGoldenSection * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = checked(f, u);
    ++trace.iterations;
    trace.evaluations.push_back({u, fu});

    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  trace.converged = true;
  return {x, fx, std::move(trace)};
}

double MemoizedObjective::operator()(double x) {
  ++total_;
  const auto key = static_cast<long long>(std::llround(x / grid_));
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double fx = f_(static_cast<double>(key) * grid_);
  cache_.emplace(key, fx);
  return fx;
}

}  // namespace lambdatune
