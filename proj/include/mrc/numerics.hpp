#pragma once

// Numerical kernels shared by both schemes: principal-branch Lambert W,
// bracketed bisection, a dense two-phase simplex LP solver and a two-block
// coordinate-descent minimizer.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mrc {

inline constexpr int kLambertMaxIterations = 64;

// W0(x): w >= -1 with w*exp(w) = x. Arguments within 1e-12 below -1/e are
// clamped to the branch point; anything lower throws DomainError.
double lambert_w0(double x);

// W0((p - 1)/e) + 1 for p >= 0, evaluated from the offset p = 1 + e*x so that
// arguments close to the branch point keep full relative accuracy.
double lambert_w0_branch_offset(double p);

// Inverse of lambert_w0_branch_offset: (eps - 1)*exp(eps) + 1, summed as a
// series for small eps where the closed form cancels.
double branch_offset_value(double eps);

struct BracketedRoot {
  double lo = 0.0;
  double hi = 0.0;
  double tol = 1e-9;
};

// Root of a monotone f on the bracket; returns once the bracket is narrower
// than `tol` (or f hits zero exactly). Throws BracketError when f(lo) and
// f(hi) share a strict sign or the bracket is malformed.
double bisect(const std::function<double(double)>& f, const BracketedRoot& bracket);

// Minimizer of a convex (unimodal) function on [lo, hi]. Endpoints are
// considered, so boundary optima are returned exactly.
double golden_section_minimize(const std::function<double(double)>& f, double lo,
                               double hi, double rel_tol = 1e-13);

// ---------------------------------------------------------------------------
// Linear programming: minimize c'x s.t. rows a_i'x <= b_i, lower <= x <= upper.

struct LpRow {
  std::vector<double> coeffs;
  double bound = 0.0;
};

// Which optimal vertex to return when the optimum is not unique.
enum class LpTieBreak {
  kLexicographicMin,  // smallest x_0, then smallest x_1, ...
  kLexicographicMax,  // largest x_0, then largest x_1, ...
};

struct LpProblem {
  std::vector<double> objective;
  std::vector<LpRow> rows;
  std::vector<double> lower;  // finite
  std::vector<double> upper;  // may be +inf
  LpTieBreak tie_break = LpTieBreak::kLexicographicMin;

  void validate() const;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
};

// Throws Infeasible (index = a violated row) or Unbounded.
LpSolution solve_lp(const LpProblem& problem);

// ---------------------------------------------------------------------------
// Block coordinate descent over two coupled blocks (e.g. offload bits and
// offload times). Each coordinate is minimized exactly by a 1-D search.

struct BoxBounds {
  std::vector<double> lo;
  std::vector<double> hi;
};

struct BcdOptions {
  double tol = 1e-9;  // absolute objective decrease that ends the sweeps
  int max_sweeps = 10000;
};

struct BcdResult {
  std::vector<double> x;
  std::vector<double> y;
  double value = 0.0;
  int sweeps = 0;
  std::vector<double> history;  // objective after each sweep
};

using TwoBlockObjective =
    std::function<double(std::span<const double>, std::span<const double>)>;

// Throws ConvergenceError if the objective ever increases or the sweep cap
// is reached without the decrease dropping below tol.
BcdResult bcd_minimize(const TwoBlockObjective& objective, std::vector<double> x0,
                       std::vector<double> y0, const BoxBounds& x_bounds,
                       const BoxBounds& y_bounds, const BcdOptions& options = {});

}  // namespace mrc
