#pragma once

// Reference implementations and fixtures shared by the test suites. Nothing
// here calls into the library's numeric code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lambdatune/rd_curve.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // n strictly increasing values starting near `start` with steps in [lo, hi].
  std::vector<double> increasing(int n, double start, double step_lo, double step_hi) {
    std::vector<double> v;
    double x = start;
    for (int i = 0; i < n; ++i) {
      v.push_back(x);
      x += uniform(step_lo, step_hi);
    }
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

// Monotone cubic reference: harmonic-mean interior slopes, three-point
// shape-preserving end slopes, evaluated through the Bezier control polygon.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
      m_[0] = m_[1] = s[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] * s[i] <= 0.0) continue;
      const double w_left = 2.0 * h[i] + h[i - 1];
      const double w_right = h[i] + 2.0 * h[i - 1];
      m_[i] = (w_left + w_right) / (w_left / s[i - 1] + w_right / s[i]);
    }
    m_[0] = end_slope(h[0], h[1], s[0], s[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
  }

  double operator()(double x) const {
    std::size_t i = 0;
    while (i + 2 < x_.size() && x > x_[i + 1]) ++i;
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double p0 = y_[i];
    const double p1 = y_[i] + m_[i] * h / 3.0;
    const double p2 = y_[i + 1] - m_[i + 1] * h / 3.0;
    const double p3 = y_[i + 1];
    const double u = 1.0 - t;
    return u * u * u * p0 + 3.0 * u * u * t * p1 + 3.0 * u * t * t * p2 + t * t * t * p3;
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  const std::vector<double>& slopes() const { return m_; }

 private:
  static double end_slope(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (s0 == 0.0 || d == 0.0 || std::signbit(d) != std::signbit(s0)) return 0.0;
    if (std::signbit(s0) != std::signbit(s1) && std::fabs(d) > std::fabs(3.0 * s0)) {
      d = 3.0 * s0;
    }
    return d;
  }

  std::vector<double> x_, y_, m_;
};

// Mean of g - f over the common x span, by the composite trapezoid rule.
inline double dense_mean_gap(const MonotoneCubic& f, const MonotoneCubic& g, int samples = 100000) {
  const double lo = std::max(f.front(), g.front());
  const double hi = std::min(f.back(), g.back());
  const double h = (hi - lo) / samples;
  double sum = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double x = i == samples ? hi : lo + i * h;
    const double w = (i == 0 || i == samples) ? 0.5 : 1.0;
    sum += w * (g(x) - f(x));
  }
  return sum * h / (hi - lo);
}

struct Samples {
  std::vector<double> quality_db;
  std::vector<double> log10_rate;
};

inline Samples sorted_samples(const std::vector<double>& rate, const std::vector<double>& db) {
  std::vector<std::size_t> order(rate.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return db[a] < db[b]; });
  Samples s;
  for (auto i : order) {
    s.quality_db.push_back(db[i]);
    s.log10_rate.push_back(std::log10(rate[i]));
  }
  return s;
}

inline double oracle_bd_rate(const Samples& ref, const Samples& test, int samples = 100000) {
  const MonotoneCubic r(ref.quality_db, ref.log10_rate);
  const MonotoneCubic t(test.quality_db, test.log10_rate);
  return (std::pow(10.0, dense_mean_gap(r, t, samples)) - 1.0) * 100.0;
}

inline double oracle_bd_quality(const Samples& ref, const Samples& test, int samples = 100000) {
  const MonotoneCubic r(ref.log10_rate, ref.quality_db);
  const MonotoneCubic t(test.log10_rate, test.quality_db);
  return dense_mean_gap(r, t, samples);
}

// Golden-section search on [a, c] down to width tol.
inline double golden_section(const std::function<double(double)>& f, double a, double c,
                             double tol) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = c - r * (c - a), x2 = a + r * (c - a);
  double f1 = f(x1), f2 = f(x2);
  while (c - a > tol) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - r * (c - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (c - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

// The synthetic clip surfaces written out directly (no noise).
struct ModelParams {
  double R0 = 30000.0, b = 0.09, beta = 0.35, gamma = 1.0;
  double S0 = 26.0, a = 0.28, c = 0.8, k_star = 2.5;
};

inline double model_rate(const ModelParams& m, int qp, double k) {
  return m.R0 * std::exp(-m.b * qp) * (1.0 - m.beta + m.beta * std::pow(k, -m.gamma));
}

inline double model_db(const ModelParams& m, int qp, double k) {
  const double u = std::log(k), us = std::log(m.k_star);
  return m.S0 - m.a * qp - m.c * ((u - us) * (u - us) - us * us);
}

inline Samples model_samples(const ModelParams& m, const std::vector<int>& ladder, double k) {
  std::vector<double> rate, db;
  for (int qp : ladder) {
    rate.push_back(model_rate(m, qp, k));
    db.push_back(model_db(m, qp, k));
  }
  return sorted_samples(rate, db);
}

// BD-Rate of curve(k) against curve(1); +inf where the model has no
// MS-SSIM score (quality at or below 0 dB).
inline double oracle_cost(const ModelParams& m, const std::vector<int>& ladder, double k,
                          int samples = 20000) {
  for (int qp : ladder) {
    if (!(model_db(m, qp, k) > 0.0)) return INFINITY;
  }
  return oracle_bd_rate(model_samples(m, ladder, 1.0), model_samples(m, ladder, k), samples);
}

struct GridOptimum {
  double k;
  double cost;
  std::vector<double> ks;
  std::vector<double> costs;
};

// 513 log-spaced k over [1/16, 16].
inline GridOptimum grid_oracle(const ModelParams& m, const std::vector<int>& ladder,
                               int samples = 20000) {
  GridOptimum g{1.0, INFINITY, {}, {}};
  for (int i = 0; i < 513; ++i) {
    const double k = std::exp(std::log(1.0 / 16.0) + i * (std::log(256.0) / 512.0));
    const double cost = oracle_cost(m, ladder, k, samples);
    g.ks.push_back(k);
    g.costs.push_back(cost);
    if (cost < g.cost) {
      g.cost = cost;
      g.k = k;
    }
  }
  return g;
}

inline lambdatune::RDCurve make_curve(const std::vector<int>& qps, const std::vector<double>& rates,
                                      const std::vector<double>& dbs, double k = 1.0,
                                      const std::string& clip = "clip") {
  std::vector<lambdatune::RDPoint> points;
  for (std::size_t i = 0; i < qps.size(); ++i) {
    lambdatune::RDPoint p;
    p.qp = qps[i];
    p.bitrate_kbps = rates[i];
    p.msssim_db = dbs[i];
    p.msssim = lambdatune::db_to_msssim(dbs[i]);
    points.push_back(p);
  }
  lambdatune::CurveKey key;
  key.clip_id = clip;
  key.k = k;
  return lambdatune::RDCurve(key, std::move(points));
}

// A random monotone RD curve with n points: rate falls and quality falls
// with QP.
inline lambdatune::RDCurve random_curve(Rng& rng, int n, double k = 1.0) {
  std::vector<int> qps;
  std::vector<double> rates, dbs;
  double rate = rng.log_uniform(2000.0, 20000.0);
  double db = rng.uniform(18.0, 24.0);
  int qp = rng.integer(10, 20);
  for (int i = 0; i < n; ++i) {
    qps.push_back(qp);
    rates.push_back(rate);
    dbs.push_back(db);
    qp += rng.integer(3, 8);
    rate *= rng.uniform(0.35, 0.8);
    db -= rng.uniform(0.6, 2.5);
  }
  return make_curve(qps, rates, dbs, k);
}

inline Samples samples_of(const lambdatune::RDCurve& curve) {
  return Samples{curve.quality_db(), curve.log10_rate()};
}

// Fresh empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  static std::random_device rd;
  const fs::path dir =
      fs::temp_directory_path() / ("lambdatune-test-" + name + "-" + std::to_string(rd()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline fs::path write_script(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path path = dir / name;
  write_text(path, "#!/bin/sh\n" + body);
  fs::permissions(path, fs::perms::owner_all | fs::perms::group_read | fs::perms::others_read);
  return path;
}

}  // namespace testsupport
