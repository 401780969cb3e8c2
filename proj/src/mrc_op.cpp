#include "mrc/mrc_op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mrc/errors.hpp"
#include "mrc/numerics.hpp"

namespace mrc {

namespace {

constexpr int kBisectIterations = 200;

// Largest x in [lo, hi] with pred(x) true, assuming pred is monotone
// (true then false) and pred(lo) holds.
template <typename Pred>
double last_true(double lo, double hi, Pred pred) {
  for (int it = 0; it < kBisectIterations && hi - lo > 1e-15 * hi; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

// Snap a numerically solved split onto the nearest exact case boundary and
// attach the time multiplier.
RpDecision classify(const OffloadChannel& ch, double D, double x, double t) {
  RpDecision d;
  const double lo = ch.mandatory(D);
  const double tol = 1e-9 * std::max(D, 1.0);
  if (x >= D - tol) x = D;
  if (x <= lo + tol) x = lo;
  if (x <= 0.0) return d;
  if (t >= ch.T * (1.0 - 1e-9)) t = ch.T;
  d.D_off = x;
  d.t_off = t;
  if (x == D) {
    d.tag = OffloadCase::kFullOffload;
  } else if (x == lo) {
    d.tag = OffloadCase::kMandatoryMinimum;
  } else {
    d.tag = OffloadCase::kWindowClamped;
  }
  if (t == ch.T) d.phi = std::max(0.0, multiplier_for_ratio(x / t, ch.B, ch.N, ch.h) - ch.p_c);
  return d;
}

// Coordinate descent over (D_off, t_off) for one offloading channel.
std::pair<double, double> bcd_offload(const OffloadChannel& ch, double D) {
  const double lo = ch.mandatory(D);
  auto energy = [&](std::span<const double> x, std::span<const double> t) {
    double e = (D - x[0]) * ch.c;
    if (x[0] > 0.0) e += transmit_energy(x[0], t[0], ch.B, ch.N, ch.h) + ch.p_c * t[0];
    return e;
  };
  BcdOptions opts;
  opts.tol = 1e-15 * std::max(1.0, D * ch.c);
  const auto r = bcd_minimize(energy, {lo}, {ch.T}, {{lo}, {D}}, {{ch.T * 1e-9}, {ch.T}}, opts);
  return {r.x[0], r.x[0] > 0.0 ? r.y[0] : 0.0};
}

}  // namespace

DualState DualState::initial(std::size_t K, double eta0) {
  DualState d;
  d.lambda.assign(K, 0.0);
  d.alpha.assign(K, K > 0 ? 1.0 / static_cast<double>(K) : 0.0);
  d.eta0 = eta0;
  return d;
}

SlaveCurve::SlaveCurve(const SlaveParams& p, const TimeBudget& budget)
    : params(p), channel(OffloadChannel::for_slave(p, budget)) {
  per_bit_sensing = p.e_s * (1.0 + p.p_c / p.p_s);
  time_cap = sensed_bits(p.p_s, budget.T_s, p.e_s);
}

double SlaveCurve::energy(double D) const {
  return per_bit_sensing * D + channel.processing_energy(D);
}

double SlaveCurve::marginal(double D) const {
  return per_bit_sensing + channel.processing_marginal(D);
}

double SlaveCurve::max_bits(double level, double cap) const {
  if (!(level > 0.0)) return 0.0;
  if (energy(cap) <= level) return cap;
  return last_true(0.0, cap, [&](double D) { return energy(D) <= level; });
}

SensingPlan solve_sp1(const std::vector<double>& weights, const std::vector<SlaveParams>& slaves,
                      double D, double T_s) {
  const std::size_t K = slaves.size();
  if (weights.size() != K) throw InvalidParameter("solve_sp1: size mismatch");
  if (!(D >= 0.0)) throw InvalidParameter("solve_sp1: negative demand");
  SensingPlan plan{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  double capacity = 0.0;
  for (const auto& s : slaves) capacity += sensed_bits(s.p_s, T_s, s.e_s);
  if (capacity < D * (1.0 - 1e-12)) {
    throw Infeasible("solve_sp1: sensing capacity " + std::to_string(capacity) +
                     " bits is below demand " + std::to_string(D));
  }
  if (D == 0.0) return plan;

  LpProblem lp;
  lp.lower.assign(K, 0.0);
  lp.upper.assign(K, T_s);
  lp.tie_break = LpTieBreak::kLexicographicMax;
  LpRow demand{std::vector<double>(K), -D};
  for (std::size_t k = 0; k < K; ++k) {
    if (!(weights[k] >= 0.0)) throw InvalidParameter("solve_sp1: negative weight");
    lp.objective.push_back(weights[k] * (slaves[k].p_s + slaves[k].p_c));
    demand.coeffs[k] = -slaves[k].p_s / slaves[k].e_s;
  }
  lp.rows.push_back(std::move(demand));
  const LpSolution sol = solve_lp(lp);
  for (std::size_t k = 0; k < K; ++k) {
    plan.t_s[k] = std::clamp(sol.x[k], 0.0, T_s);
    plan.D[k] = sensed_bits(slaves[k].p_s, plan.t_s[k], slaves[k].e_s);
  }
  return plan;
}

OffloadPlan solve_sp2(const std::vector<double>& weights, const std::vector<SlaveParams>& slaves,
                      const std::vector<double>& D_k, const TimeBudget& budget, Sp2Method method) {
  const std::size_t K = slaves.size();
  if (weights.size() != K || D_k.size() != K) throw InvalidParameter("solve_sp2: size mismatch");
  OffloadPlan plan{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  // A positive weight scales a robot's term without moving its argmin, so
  // each robot is solved on its own.
  for (std::size_t k = 0; k < K; ++k) {
    if (!(weights[k] >= 0.0)) throw InvalidParameter("solve_sp2: negative weight");
    if (D_k[k] <= 0.0) continue;
    const auto ch = OffloadChannel::for_slave(slaves[k], budget);
    if (method == Sp2Method::kClosedForm) {
      plan.D_off[k] = ch.optimal_offload(D_k[k]);
      plan.t_off[k] = ch.offload_time(plan.D_off[k]);
    } else {
      std::tie(plan.D_off[k], plan.t_off[k]) = bcd_offload(ch, D_k[k]);
    }
  }
  return plan;
}

double solve_sp3(const std::vector<double>& alpha, const std::vector<double>& energies) {
  if (alpha.size() != energies.size()) throw InvalidParameter("solve_sp3: size mismatch");
  if (energies.empty()) return 0.0;
  const double sum = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidParameter("solve_sp3: alpha must sum to 1");
  return *std::max_element(energies.begin(), energies.end());
}

DualState dual_step(const DualState& dual, const std::vector<double>& energies,
                    const std::vector<double>& reserves, double e_star, int iter) {
  if (iter < 1) throw InvalidParameter("dual_step: iteration index starts at 1");
  const std::size_t K = dual.lambda.size();
  if (dual.alpha.size() != K || energies.size() != K || reserves.size() != K) {
    throw InvalidParameter("dual_step: size mismatch");
  }
  DualState next = dual;
  const double eta = dual.eta0 / std::sqrt(static_cast<double>(iter));
  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    next.lambda[k] = std::max(0.0, dual.lambda[k] + eta * (energies[k] - reserves[k]));
    next.alpha[k] = std::max(0.0, dual.alpha[k] + eta * (energies[k] - e_star));
    sum += next.alpha[k];
  }
  if (sum > 0.0) {
    for (double& a : next.alpha) a /= sum;
  } else {
    next.alpha.assign(K, 1.0 / static_cast<double>(K));
  }
  return next;
}

double dual_function(const std::vector<SlaveCurve>& curves, const std::vector<double>& reserves,
                     const DualState& dual, double D) {
  const std::size_t K = curves.size();
  double offset = 0.0;
  double capacity = 0.0;
  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k) {
    w[k] = dual.alpha[k] + dual.lambda[k];
    offset -= dual.lambda[k] * reserves[k];
    capacity += curves[k].time_cap;
  }
  if (capacity < D) return std::numeric_limits<double>::infinity();

  // Robot share minimizing w E(D) - nu D over the sensing window.
  auto share = [&](std::size_t k, double nu) {
    const auto& cv = curves[k];
    if (w[k] == 0.0) return nu > 0.0 ? cv.time_cap : 0.0;
    const double target = nu / w[k];
    if (cv.marginal(0.0) >= target) return 0.0;
    if (cv.marginal(cv.time_cap) <= target) return cv.time_cap;
    return last_true(0.0, cv.time_cap, [&](double x) { return cv.marginal(x) <= target; });
  };
  auto value = [&](double nu) {
    double v = nu * D + offset;
    for (std::size_t k = 0; k < K; ++k) {
      const double x = share(k, nu);
      v += w[k] * curves[k].energy(x) - nu * x;
    }
    return v;
  };
  auto total = [&](double nu) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += share(k, nu);
    return s;
  };

  double nu_hi = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    nu_hi = std::max(nu_hi, w[k] * curves[k].marginal(curves[k].time_cap));
  }
  nu_hi = std::max(nu_hi * 2.0, std::numeric_limits<double>::min());
  const double nu = last_true(0.0, nu_hi, [&](double v) { return total(v) < D; });
  return std::max(value(nu), value(std::nextafter(nu, nu_hi)));
}

OpSolution solve_p3(const std::vector<SlaveParams>& slaves, const std::vector<double>& reserves,
                    double D, const TimeBudget& budget, const OpOptions& options) {
  const std::size_t K = slaves.size();
  if (reserves.size() != K) throw InvalidParameter("solve_p3: size mismatch");
  if (K == 0) throw InvalidParameter("solve_p3: no slave robots");
  if (!(D >= 0.0)) throw InvalidParameter("solve_p3: negative demand");

  std::vector<SlaveCurve> curves;
  curves.reserve(K);
  std::vector<double> cap(K);
  double capacity = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    curves.emplace_back(slaves[k], budget);
    // A hair under the reserve so the model's own summation cannot overdraw it.
    cap[k] = curves[k].max_bits(reserves[k] * (1.0 - 1e-12), curves[k].time_cap);
    capacity += cap[k];
  }
  if (capacity < D * (1.0 - 1e-12)) {
    throw Infeasible("solve_p3: reserves and sensing windows cover only " +
                     std::to_string(capacity) + " of " + std::to_string(D) + " bits");
  }

  // Smallest common energy level whose per-robot shares cover the demand.
  std::vector<double> share(K, 0.0);
  double level = 0.0;
  if (D > 0.0) {
    auto covered = [&](double e) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += curves[k].max_bits(e, cap[k]);
      return s;
    };
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < K; ++k) hi = std::max(hi, curves[k].energy(cap[k]));
    for (int it = 0; it < kBisectIterations && hi - lo > 1e-14 * hi; ++it) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      (covered(mid) >= D ? hi : lo) = mid;
    }
    level = hi;
    double excess = -D;
    for (std::size_t k = 0; k < K; ++k) {
      share[k] = curves[k].max_bits(level, cap[k]);
      excess += share[k];
    }
    for (std::size_t k = K; k-- > 0 && excess > 0.0;) {
      const double cut = std::min(excess, share[k]);
      share[k] -= cut;
      excess -= cut;
    }
  }

  OpSolution sol;
  sol.allocation.slaves.resize(K);
  sol.decisions.resize(K);
  sol.energies.resize(K);
  std::vector<double> totals(K);
  for (std::size_t k = 0; k < K; ++k) {
    auto& a = sol.allocation.slaves[k];
    a.D = share[k];
    a.t_s = std::min(share[k] * slaves[k].e_s / slaves[k].p_s, budget.T_s);
    sol.decisions[k] = solve_p5_channel(curves[k].channel, share[k]);
    a.D_off = sol.decisions[k].D_off;
    a.t_off = sol.decisions[k].t_off;
    sol.energies[k] = slave_energy(slaves[k], a.t_s, a.D, a.D_off, a.t_off);
    totals[k] = sol.energies[k].E_tot;
  }
  sol.e_star = *std::max_element(totals.begin(), totals.end());
  if (D == 0.0) {
    sol.dual = DualState::initial(K, options.eta0);
    return sol;
  }

  // Dual certificate built from the primal optimum: level robots get alpha
  // proportional to 1/E', reserve-capped robots get the matching lambda.
  DualState kkt = DualState::initial(K, options.eta0);
  {
    std::fill(kkt.alpha.begin(), kkt.alpha.end(), 0.0);
    double inv_sum = 0.0;
    std::vector<bool> at_level(K, false);
    for (std::size_t k = 0; k < K; ++k) {
      const double e = curves[k].energy(share[k]);
      at_level[k] = e >= level * (1.0 - 1e-9);
      if (at_level[k]) inv_sum += 1.0 / curves[k].marginal(share[k]);
    }
    if (inv_sum > 0.0) {
      const double nu = 1.0 / inv_sum;
      for (std::size_t k = 0; k < K; ++k) {
        const double m = nu / curves[k].marginal(share[k]);
        if (at_level[k]) {
          kkt.alpha[k] = m;
        } else if (cap[k] < curves[k].time_cap && share[k] >= cap[k] * (1.0 - 1e-12)) {
          kkt.lambda[k] = m;
        }
      }
    }
  }

  DualState dual = DualState::initial(K, options.eta0);
  double best = dual_function(curves, reserves, kkt, D);
  sol.dual = kkt;
  for (int it = 1; it <= options.max_iterations; ++it) {
    std::vector<double> w(K);
    for (std::size_t k = 0; k < K; ++k) w[k] = dual.alpha[k] + dual.lambda[k];
    const SensingPlan sp1 = solve_sp1(w, slaves, D, budget.T_s);
    const OffloadPlan sp2 = solve_sp2(w, slaves, sp1.D, budget, options.sp2);
    std::vector<double> energies(K);
    for (std::size_t k = 0; k < K; ++k) {
      energies[k] = slave_energy(slaves[k], sp1.t_s[k], sp1.D[k], sp2.D_off[k], sp2.t_off[k]).E_tot;
    }
    const double e_it = solve_sp3(dual.alpha, energies);
    const double q = dual_function(curves, reserves, dual, D);
    if (q > best) {
      best = q;
      sol.dual = dual;
    }
    sol.dual_history.push_back(best);
    sol.iterations = it;
    if (sol.e_star - best <= options.gap_tol * sol.e_star) break;
    dual = dual_step(dual, energies, reserves, e_it, it);
  }
  sol.dual_value = best;
  sol.gap = sol.e_star - best;
  return sol;
}

RpDecision solve_p2_master(const MasterParams& master, double D_M, double reserve,
                           const TimeBudget& budget) {
  if (!(D_M >= 0.0)) throw InvalidParameter("solve_p2_master: negative data size");
  if (D_M == 0.0) return {};
  const auto ch = OffloadChannel::for_master(master, budget);
  const auto [x, t] = bcd_offload(ch, D_M);
  const RpDecision d = classify(ch, D_M, x, t);
  const double e = master_energy(master, D_M, d.D_off, d.t_off).E_tot;
  if (e > reserve) {
    throw Infeasible("solve_p2_master: cheapest split needs " + std::to_string(e) +
                     " J but the master holds " + std::to_string(reserve) + " J");
  }
  return d;
}

}  // namespace mrc
