#include "mrc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

constexpr double kInvE = 1.0 / std::numbers::e;

double lambert_w0_halley(double x);

}  // namespace

double branch_offset_value(double eps) {
  if (std::abs(eps) < 0.5) {
    double term = eps;  // eps^n / n!
    double sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      term *= eps / n;
      const double add = (n - 1) * term;
      sum += add;
      if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return (eps - 1.0) * std::exp(eps) + 1.0;
}

namespace {

double lambert_w0_halley(double x) {
  double w;
  if (x < 1.0) {
    w = std::log1p(x);
  } else if (x < std::numbers::e) {
    w = 0.5 * std::log1p(x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int it = 0; it < kLambertMaxIterations; ++it) {
    // r = (w e^w - x) e^-w keeps large arguments from overflowing.
    const double r = w - x * std::exp(-w);
    const double denom = (w + 1.0) - (w + 2.0) * r / (2.0 * w + 2.0);
    const double step = r / denom;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) {
      break;
    }
  }
  return w;
}

}  // namespace

double lambert_w0_branch_offset(double p) {
  if (!(p >= 0.0)) {
    throw DomainError("lambert_w0_branch_offset: offset must be non-negative");
  }
  if (p == 0.0) return 0.0;
  if (std::isinf(p)) return p;

  double eps;
  if (p < 0.5) {
    const double q = std::sqrt(2.0 * p);
    eps = q * (1.0 + q * (-1.0 / 3.0 + q * (11.0 / 72.0 - q * 43.0 / 540.0)));
  } else {
    eps = lambert_w0_halley((p - 1.0) * kInvE) + 1.0;
  }
  for (int it = 0; it < kLambertMaxIterations; ++it) {
    const double ex = std::exp(eps);
    const double F = branch_offset_value(eps) - p;
    const double d1 = eps * ex;
    const double d2 = (eps + 1.0) * ex;
    if (d1 == 0.0) break;
    const double newton = F / d1;
    const double step = newton / (1.0 - 0.5 * newton * d2 / d1);
    double next = eps - step;
    if (next <= 0.0) next = 0.5 * eps;
    const double change = std::abs(next - eps);
    eps = next;
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * eps) break;
  }
  return eps;
}

double lambert_w0(double x) {
  constexpr double kBranch = -kInvE;
  if (std::isnan(x)) throw DomainError("lambert_w0: NaN argument");
  if (x < kBranch - 1e-12) {
    throw DomainError("lambert_w0: argument below -1/e: " + std::to_string(x));
  }
  if (x <= kBranch) return -1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x < -0.25) {
    return lambert_w0_branch_offset(std::max(0.0, std::fma(std::numbers::e, x, 1.0))) - 1.0;
  }
  return lambert_w0_halley(x);
}

double bisect(const std::function<double(double)>& f, const BracketedRoot& bracket) {
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (!(lo < hi) || !(bracket.tol > 0.0)) {
    throw BracketError("bisect: need lo < hi and tol > 0");
  }
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::isnan(f_lo) || std::isnan(f_hi) || (f_lo > 0.0) == (f_hi > 0.0)) {
    throw BracketError("bisect: f(lo) and f(hi) do not bracket a root");
  }
  for (int it = 0; it < 4096 && hi - lo > bracket.tol; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

double golden_section_minimize(const std::function<double(double)>& f, double lo,
                               double hi, double rel_tol) {
  if (!(lo <= hi)) throw InvalidParameter("golden_section_minimize: lo > hi");
  if (lo == hi) return lo;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  const double width_tol = rel_tol * (hi - lo);
  for (int it = 0; it < 400 && b - a > width_tol; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  double best = fc <= fd ? c : d;
  double f_best = std::min(fc, fd);
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo <= f_best) {
    best = lo;
    f_best = f_lo;
  }
  if (f_hi < f_best) best = hi;
  return best;
}

// ---------------------------------------------------------------------------
// Dense two-phase simplex with Bland's rule.

void LpProblem::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw InvalidParameter("LpProblem: bound vectors must match objective size");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i])) throw InvalidParameter("LpProblem: lower bounds must be finite");
    if (!(lower[i] <= upper[i])) throw InvalidParameter("LpProblem: lower > upper for variable " + std::to_string(i));
  }
  for (const auto& row : rows) {
    if (row.coeffs.size() != n) throw InvalidParameter("LpProblem: row width mismatch");
  }
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kFeasEps = 1e-9;

struct DenseLp {
  std::vector<std::vector<double>> a;  // m x n, rows scaled
  std::vector<double> b;
  std::vector<double> c;               // n
  std::vector<std::size_t> origin;     // row -> caller's row index
};

enum class SimplexStatus { kOptimal, kInfeasible, kUnbounded };

struct SimplexOutcome {
  SimplexStatus status = SimplexStatus::kOptimal;
  std::vector<double> y;
  std::size_t culprit = 0;  // violated row or unbounded column
};

class Tableau {
 public:
  Tableau(const DenseLp& lp) : m_(lp.b.size()), n_(lp.c.size()) {
    std::size_t n_art = 0;
    flipped_.assign(m_, false);
    for (std::size_t r = 0; r < m_; ++r) {
      if (lp.b[r] < 0.0) {
        flipped_[r] = true;
        ++n_art;
      }
    }
    art_begin_ = n_ + m_;
    cols_ = n_ + m_ + n_art;
    t_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m_, 0);
    std::size_t art = art_begin_;
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = flipped_[r] ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) t_[r][j] = sign * lp.a[r][j];
      t_[r][n_ + r] = sign;  // slack (or surplus when flipped)
      t_[r][cols_] = sign * lp.b[r];
      if (flipped_[r]) {
        t_[r][art] = 1.0;
        basis_[r] = art++;
      } else {
        basis_[r] = n_ + r;
      }
    }
  }

  SimplexOutcome run(const std::vector<double>& c) {
    SimplexOutcome out;
    if (art_begin_ < cols_) {
      std::vector<double> phase1(cols_, 0.0);
      for (std::size_t j = art_begin_; j < cols_; ++j) phase1[j] = 1.0;
      if (!iterate(phase1, cols_, out)) return out;
      double infeas = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] >= art_begin_) infeas += t_[r][cols_];
      }
      if (infeas > kFeasEps) {
        out.status = SimplexStatus::kInfeasible;
        for (std::size_t r = 0; r < m_; ++r) {
          if (basis_[r] >= art_begin_ && t_[r][cols_] > kFeasEps) {
            out.culprit = r;
            break;
          }
        }
        return out;
      }
      // Pivot zero-valued artificials out where possible.
      for (std::size_t r = 0; r < m_; ++r) {
        if (basis_[r] < art_begin_) continue;
        for (std::size_t j = 0; j < art_begin_; ++j) {
          if (std::abs(t_[r][j]) > kPivotEps) {
            pivot(r, j);
            break;
          }
        }
      }
    }
    std::vector<double> phase2(cols_, 0.0);
    std::copy(c.begin(), c.end(), phase2.begin());
    if (!iterate(phase2, art_begin_, out)) return out;
    out.y.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) out.y[basis_[r]] = std::max(0.0, t_[r][cols_]);
    }
    return out;
  }

 private:
  void pivot(std::size_t r, std::size_t col) {
    auto& prow = t_[r];
    const double inv = 1.0 / prow[col];
    for (double& v : prow) v *= inv;
    prow[col] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double factor = t_[i][col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= factor * prow[j];
      t_[i][col] = 0.0;
    }
    basis_[r] = col;
  }

  // Minimizes cost over columns [0, allowed). Returns false if unbounded.
  bool iterate(const std::vector<double>& cost, std::size_t allowed, SimplexOutcome& out) {
    for (int it = 0; it < 100000; ++it) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < allowed; ++j) {
        double reduced = cost[j];
        for (std::size_t r = 0; r < m_; ++r) reduced -= cost[basis_[r]] * t_[r][j];
        if (reduced < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) return true;
      std::size_t leave = m_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (t_[r][enter] <= kPivotEps) continue;
        const double ratio = t_[r][cols_] / t_[r][enter];
        if (leave == m_ || ratio < best_ratio - 1e-14) {
          best_ratio = ratio;
          leave = r;
        } else if (ratio <= best_ratio + 1e-14 && basis_[r] < basis_[leave]) {
          leave = r;
        }
      }
      if (leave == m_) {
        out.status = SimplexStatus::kUnbounded;
        out.culprit = enter;
        return false;
      }
      pivot(leave, enter);
    }
    throw ConvergenceError("solve_lp: simplex iteration cap reached");
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t cols_ = 0;
  std::size_t art_begin_ = 0;
  std::vector<bool> flipped_;
  std::vector<std::vector<double>> t_;
  std::vector<std::size_t> basis_;
};

SimplexOutcome run_simplex(const DenseLp& lp) {
  Tableau tableau(lp);
  return tableau.run(lp.c);
}

void add_row(DenseLp& lp, std::vector<double> coeffs, double bound, std::size_t origin) {
  double scale = 0.0;
  for (double v : coeffs) scale = std::max(scale, std::abs(v));
  if (scale > 0.0) {
    for (double& v : coeffs) v /= scale;
    bound /= scale;
  }
  lp.a.push_back(std::move(coeffs));
  lp.b.push_back(bound);
  lp.origin.push_back(origin);
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  problem.validate();
  const std::size_t n = problem.objective.size();

  // Shift to y = x - lower >= 0; finite upper bounds become rows.
  DenseLp base;
  for (std::size_t r = 0; r < problem.rows.size(); ++r) {
    const auto& row = problem.rows[r];
    double shifted = row.bound;
    bool all_zero = true;
    for (std::size_t j = 0; j < n; ++j) {
      shifted -= row.coeffs[j] * problem.lower[j];
      if (row.coeffs[j] != 0.0) all_zero = false;
    }
    if (all_zero) {
      if (shifted < -kFeasEps * std::max(1.0, std::abs(row.bound))) {
        throw Infeasible("solve_lp: row " + std::to_string(r) + " has no variables and cannot hold", r);
      }
      continue;
    }
    add_row(base, row.coeffs, shifted, r);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isfinite(problem.upper[j])) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0;
      add_row(base, std::move(e), problem.upper[j] - problem.lower[j], problem.rows.size() + j);
    }
  }
  double c_scale = 0.0;
  for (double v : problem.objective) c_scale = std::max(c_scale, std::abs(v));
  base.c = problem.objective;
  if (c_scale > 0.0) {
    for (double& v : base.c) v /= c_scale;
  }

  auto check = [&](const SimplexOutcome& out) {
    if (out.status == SimplexStatus::kInfeasible) {
      const std::size_t origin = base.origin[out.culprit];
      throw Infeasible("solve_lp: infeasible, violated row " + std::to_string(origin), origin);
    }
    if (out.status == SimplexStatus::kUnbounded) {
      throw Unbounded("solve_lp: objective unbounded along variable " +
                          std::to_string(std::min(out.culprit, n)),
                      out.culprit);
    }
  };

  SimplexOutcome first = run_simplex(base);
  check(first);
  std::vector<double> y = first.y;

  // Lexicographic refinement: hold the optimum, then push each variable to
  // its extreme in index order, freezing it before moving on.
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) z += base.c[j] * y[j];
  DenseLp refine = base;
  add_row(refine, base.c, z + 1e-11 * std::abs(z) + 1e-15, problem.rows.size() + n);
  const double sign = problem.tie_break == LpTieBreak::kLexicographicMin ? 1.0 : -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    DenseLp step = refine;
    step.c.assign(n, 0.0);
    step.c[i] = sign;
    SimplexOutcome out = run_simplex(step);
    if (out.status != SimplexStatus::kOptimal) break;
    y = out.y;
    const double slack = 1e-12 * std::max(1.0, std::abs(y[i]));
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    add_row(refine, e, y[i] + slack, problem.rows.size() + n + 1 + i);
    e[i] = -1.0;
    add_row(refine, e, -y[i] + slack, problem.rows.size() + n + 1 + i);
  }

  LpSolution solution;
  solution.x.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    solution.x[j] = std::min(problem.lower[j] + y[j], problem.upper[j]);
    solution.objective += problem.objective[j] * solution.x[j];
  }
  return solution;
}

// ---------------------------------------------------------------------------

BcdResult bcd_minimize(const TwoBlockObjective& objective, std::vector<double> x0,
                       std::vector<double> y0, const BoxBounds& x_bounds,
                       const BoxBounds& y_bounds, const BcdOptions& options) {
  if (x_bounds.lo.size() != x0.size() || x_bounds.hi.size() != x0.size() ||
      y_bounds.lo.size() != y0.size() || y_bounds.hi.size() != y0.size()) {
    throw InvalidParameter("bcd_minimize: bounds must match block sizes");
  }
  BcdResult res;
  res.x = std::move(x0);
  res.y = std::move(y0);
  double current = objective(res.x, res.y);
  if (!std::isfinite(current)) {
    throw InvalidParameter("bcd_minimize: objective not finite at the starting point");
  }

  auto sweep_block = [&](std::vector<double>& block, const BoxBounds& bounds, bool first) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      const double keep = block[i];
      auto along = [&](double v) {
        block[i] = v;
        return first ? objective(block, res.y) : objective(res.x, block);
      };
      const double cand = golden_section_minimize(along, bounds.lo[i], bounds.hi[i]);
      const double value = along(cand);
      if (value <= current) {
        block[i] = cand;
        current = value;
      } else {
        block[i] = keep;
      }
    }
  };

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    const double before = current;
    sweep_block(res.x, x_bounds, true);
    sweep_block(res.y, y_bounds, false);
    res.history.push_back(current);
    res.sweeps = sweep;
    if (before - current <= options.tol) {
      res.value = current;
      return res;
    }
  }
  throw ConvergenceError("bcd_minimize: no convergence within the sweep cap");
}

}  // namespace mrc
