#pragma once

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

namespace lambdatune {

using Objective = std::function<double(double)>;

// a < b < c with f(b) below both ends. Validated on construction.
struct Bracket {
  Bracket(double a, double b, double c, double fa, double fb, double fc);

  double a, b, c;
  double fa, fb, fc;
};

enum class SearchDomain { Linear, Logarithmic };

struct OptimizerConfig {
  double xtol = 0.01;
  int max_iters = 25;
  SearchDomain domain = SearchDomain::Logarithmic;

  void validate() const;
};

struct Evaluation {
  double x;
  double fx;
};

struct OptimizerTrace {
  // The bracket midpoint first, then every point Brent evaluated.
  std::vector<Evaluation> evaluations;
  // Width of the enclosing interval before each iteration.
  std::vector<double> interval_widths;
  // Post-bracket evaluations.
  int iterations = 0;
  bool converged = false;
};

struct Minimum {
  double x;
  double fx;
  OptimizerTrace trace;
};

// Optional hard limits for the downhill expansion.
struct SearchLimits {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// Golden-ratio downhill expansion from (x0, x1). Throws BracketError when no
// interior minimum is found within max_expansions steps or the limits.
Bracket bracket_minimum(const Objective& f, double x0, double x1, int max_expansions = 50,
                        SearchLimits limits = {});

// Brent's method: parabolic interpolation guarded by golden-section steps.
// Stops when the bracket shrinks to ~4 * xtol around the best point or after
// max_iters evaluations (converged = false). Always returns an evaluated point.
Minimum brent_minimize(const Objective& f, const Bracket& bracket, const OptimizerConfig& config);

// Caches f by argument rounded to a 1e-6 grid.
class MemoizedObjective {
 public:
  explicit MemoizedObjective(Objective f, double grid = 1e-6) : f_(std::move(f)), grid_(grid) {}

  double operator()(double x);

  std::size_t distinct_calls() const { return cache_.size(); }
  std::size_t total_calls() const { return total_; }

 private:
  Objective f_;
  double grid_;
  std::map<long long, double> cache_;
  std::size_t total_ = 0;
};

}  // namespace lambdatune
