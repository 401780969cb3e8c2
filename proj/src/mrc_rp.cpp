#include "mrc/mrc_rp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "mrc/errors.hpp"
#include "mrc/numerics.hpp"

namespace mrc {

namespace {

constexpr double kLn2 = std::numbers::ln2;

}  // namespace

std::string_view to_string(OffloadCase c) {
  switch (c) {
    case OffloadCase::kNoOffload:
      return "no-offload";
    case OffloadCase::kMandatoryMinimum:
      return "mandatory-minimum";
    case OffloadCase::kFullOffload:
      return "full-offload";
    case OffloadCase::kWindowClamped:
      return "window-clamped";
  }
  return "unknown";
}

double priority_indicator(double B, double h, double C, double p_cmp, double N) {
  return B * h * C * p_cmp / (N * kLn2);
}

double threshold_gamma(double O, double N, double h) {
  if (!(O > 1.0)) return 0.0;
  // O ln O - O + 1 = branch_offset_value(ln O), accurate near O = 1.
  return N / h * branch_offset_value(std::log(O));
}

double offload_ratio(double phi, double B, double N, double h) {
  if (!(phi >= 0.0)) throw DomainError("offload_ratio: negative multiplier");
  return B * lambert_w0_branch_offset(h * phi / N) / kLn2;
}

double multiplier_for_ratio(double ratio, double B, double N, double h) {
  return N / h * branch_offset_value(ratio * kLn2 / B);
}

OffloadChannel OffloadChannel::for_slave(const SlaveParams& p, const TimeBudget& budget) {
  OffloadChannel ch;
  ch.c = p.C * p.p_cmp;
  ch.B = p.B;
  ch.N = p.N;
  ch.h = p.h;
  ch.p_c = p.p_c;
  ch.T = budget.T_s_cmp;
  ch.local_bits = local_capacity_bits(p.U, p.C, budget.T_s_cmp, budget.local_window);
  ch.C = p.C;
  ch.p_cmp = p.p_cmp;
  return ch;
}

OffloadChannel OffloadChannel::for_master(const MasterParams& p, const TimeBudget& budget) {
  OffloadChannel ch;
  ch.c = p.C_M * p.p_cmp_M;
  ch.B = p.B_M;
  ch.N = p.N_1;
  ch.h = p.h_M;
  ch.p_c = p.p_c_M;
  ch.T = budget.T_M_cmp;
  ch.local_bits = local_capacity_bits(p.U_M, p.C_M, budget.T_M_cmp, budget.local_window);
  ch.C = p.C_M;
  ch.p_cmp = p.p_cmp_M;
  return ch;
}

double OffloadChannel::priority() const { return priority_indicator(B, h, C, p_cmp, N); }

ThresholdProfile OffloadChannel::profile() const {
  ThresholdProfile tp;
  tp.O = priority();
  tp.gamma = threshold_gamma(tp.O, N, h);
  tp.ratio_unconstrained = tp.O > 1.0 ? B * std::log2(tp.O) : 0.0;
  return tp;
}

double OffloadChannel::min_ratio() const {
  if (p_c == 0.0) return 0.0;
  return offload_ratio(p_c, B, N, h);
}

double OffloadChannel::mandatory(double D) const { return std::max(D - local_bits, 0.0); }

double OffloadChannel::tx_energy(double x) const {
  if (x <= 0.0) return 0.0;
  const double rho = min_ratio();
  if (x <= rho * T) {
    // Circuit power dominates: send at the per-bit optimal ratio rho.
    return x / rho * (N / h * std::expm1(rho / B * kLn2) + p_c);
  }
  return T * (N / h * std::expm1(x / (B * T) * kLn2) + p_c);
}

double OffloadChannel::tx_marginal(double x) const {
  const double rho = min_ratio();
  const double r = std::max(x / T, rho);
  return N * kLn2 / (B * h) * std::exp2(r / B);
}

double OffloadChannel::offload_time(double x) const {
  if (x <= 0.0) return 0.0;
  const double rho = min_ratio();
  if (x <= rho * T) return x / rho;
  return T;
}

double OffloadChannel::unconstrained_offload() const {
  if (!(tx_marginal(0.0) < c)) return 0.0;
  return B * T * std::log2(priority());
}

double OffloadChannel::optimal_offload(double D) const {
  const double lo = mandatory(D);
  return std::clamp(unconstrained_offload(), lo, D);
}

double OffloadChannel::processing_energy(double D) const {
  const double x = optimal_offload(D);
  return (D - x) * c + tx_energy(x);
}

double OffloadChannel::processing_marginal(double D) const {
  const double x_free = unconstrained_offload();
  if (x_free >= D) return tx_marginal(D);
  const double lo = mandatory(D);
  if (lo > x_free) return tx_marginal(lo);
  return c;
}

std::vector<double> fairness_weights(const std::vector<double>& reserves) {
  if (reserves.empty()) return {};
  for (std::size_t k = 0; k < reserves.size(); ++k) {
    if (!(reserves[k] > 0.0) || !std::isfinite(reserves[k])) {
      throw InvalidParameter("fairness_weights: reserve of robot " + std::to_string(k + 1) +
                             " must be positive");
    }
  }
  const double lo = *std::min_element(reserves.begin(), reserves.end());
  std::vector<double> beta(reserves.size());
  for (std::size_t k = 0; k < reserves.size(); ++k) beta[k] = lo / reserves[k];
  return beta;
}

SensingPlan solve_p4(const std::vector<SlaveParams>& slaves,
                     const std::vector<double>& reserves, const std::vector<double>& beta,
                     double D, double T_s) {
  const std::size_t K = slaves.size();
  if (reserves.size() != K || beta.size() != K) {
    throw InvalidParameter("solve_p4: size mismatch");
  }
  if (!(D >= 0.0)) throw InvalidParameter("solve_p4: negative demand");
  SensingPlan plan{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
  if (D == 0.0) return plan;

  // Per second of sensing: sensing + circuit + full local compute of the bits.
  std::vector<double> burn(K), rate(K), cap(K);
  double capacity = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& s = slaves[k];
    rate[k] = s.p_s / s.e_s;
    burn[k] = s.p_s + s.p_c + rate[k] * s.C * s.p_cmp;
    // A hair under the reserve so rounding in the energy sum cannot overdraw it.
    cap[k] = std::min(T_s, std::max(reserves[k], 0.0) * (1.0 - 1e-12) / burn[k]);
    capacity += cap[k] * rate[k];
  }
  if (capacity < D * (1.0 - 1e-12)) {
    throw Infeasible("solve_p4: sensing capacity " + std::to_string(capacity) +
                     " bits is below demand " + std::to_string(D));
  }

  LpProblem lp;
  lp.objective.resize(K);
  lp.lower.assign(K, 0.0);
  lp.upper = cap;
  lp.tie_break = LpTieBreak::kLexicographicMax;
  LpRow demand{std::vector<double>(K), -D};
  for (std::size_t k = 0; k < K; ++k) {
    lp.objective[k] = beta[k] * slaves[k].p_s;
    demand.coeffs[k] = -rate[k];
  }
  lp.rows.push_back(std::move(demand));
  const LpSolution sol = solve_lp(lp);

  // The tie-break leaves sub-nanosecond crumbs on robots that belong at a
  // bound. Snap them, then let the one interior robot absorb the difference.
  const double snap = 1e-8 * T_s;
  std::optional<std::size_t> interior;
  double sensed = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double t = std::clamp(sol.x[k], 0.0, cap[k]);
    if (t < snap) t = 0.0;
    if (cap[k] - t < snap) t = cap[k];
    if (t > 0.0 && t < cap[k] && !interior) interior = k;
    plan.t_s[k] = t;
    sensed += rate[k] * t;
  }
  if (!interior) {
    // Every robot sits at a bound; a shortfall goes to a sensing robot with
    // room if there is one, otherwise wherever the room is largest.
    for (bool sensing_only : {true, false}) {
      double room = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        if (sensing_only && plan.t_s[k] == 0.0) continue;
        if ((cap[k] - plan.t_s[k]) * rate[k] > room) {
          room = (cap[k] - plan.t_s[k]) * rate[k];
          interior = k;
        }
      }
      if (interior) break;
    }
  }
  if (interior && sensed < D) {
    const std::size_t k = *interior;
    plan.t_s[k] = std::min(cap[k], plan.t_s[k] + (D - sensed) / rate[k]);
  }
  for (std::size_t k = 0; k < K; ++k) {
    plan.D[k] = sensed_bits(slaves[k].p_s, plan.t_s[k], slaves[k].e_s);
  }
  return plan;
}

RpDecision solve_p5_channel(const OffloadChannel& ch, double D) {
  if (!(D >= 0.0)) throw InvalidParameter("solve_p5: negative data size");
  RpDecision d;
  const double x = ch.optimal_offload(D);
  if (x <= 0.0) return d;

  d.D_off = x;
  d.t_off = ch.offload_time(x);
  const double lo = ch.mandatory(D);
  if (x >= D) {
    d.tag = OffloadCase::kFullOffload;
  } else if (lo > 0.0 && x <= lo) {
    d.tag = OffloadCase::kMandatoryMinimum;
  } else {
    d.tag = OffloadCase::kWindowClamped;
  }
  if (d.t_off < ch.T) return d;

  // Window binds: find phi with offload_ratio(phi + p_c) * T = x.
  const double target = x / ch.T;
  auto excess = [&](double phi) { return offload_ratio(phi + ch.p_c, ch.B, ch.N, ch.h) - target; };
  double hi = ch.N / ch.h;
  while (excess(hi) < 0.0) hi *= 2.0;
  d.phi = bisect(excess, {0.0, hi, hi * 1e-15});
  return d;
}

RpDecision solve_p5_per_slave(const SlaveParams& params, double D, const TimeBudget& budget) {
  return solve_p5_channel(OffloadChannel::for_slave(params, budget), D);
}

std::vector<RpDecision> solve_p5(const std::vector<SlaveParams>& slaves,
                                 const std::vector<double>& D, const TimeBudget& budget) {
  if (slaves.size() != D.size()) throw InvalidParameter("solve_p5: size mismatch");
  std::vector<RpDecision> out;
  out.reserve(slaves.size());
  for (std::size_t k = 0; k < slaves.size(); ++k) {
    out.push_back(solve_p5_per_slave(slaves[k], D[k], budget));
  }
  return out;
}

RpDecision solve_master_rp(const MasterParams& master, double D_M, const TimeBudget& budget) {
  return solve_p5_channel(OffloadChannel::for_master(master, budget), D_M);
}

double KktResiduals::max() const {
  return std::max({offload_stationarity, time_stationarity, primal, complementary});
}

KktResiduals kkt_residuals(const OffloadChannel& ch, double D, const RpDecision& d) {
  KktResiduals r;
  const double x = d.D_off;
  const double lo = ch.mandatory(D);
  const double scale = std::max(D, 1.0);
  const double phi_scale = std::max(d.phi, ch.N / ch.h);

  r.primal = std::max(0.0, lo - x) / scale + std::max(0.0, x - D) / scale +
             std::max(0.0, d.t_off - ch.T) / ch.T + std::max(0.0, -d.phi) / phi_scale;

  // Marginal cost of one more offloaded bit at the chosen ratio.
  const double ratio = x > 0.0 ? x / d.t_off : ch.min_ratio();
  const double marginal = ch.N * kLn2 / (ch.B * ch.h) * std::exp2(ratio / ch.B);
  const double gap = (marginal - ch.c) / ch.c;
  const bool at_lo = x <= lo;
  const bool at_hi = x >= D;
  if (at_lo && at_hi) {
    r.offload_stationarity = 0.0;
  } else if (at_hi) {
    r.offload_stationarity = std::max(0.0, gap);
  } else if (at_lo) {
    r.offload_stationarity = std::max(0.0, -gap);
  } else {
    r.offload_stationarity = std::abs(gap);
  }

  if (x > 0.0) {
    const double lhs = multiplier_for_ratio(ratio, ch.B, ch.N, ch.h);
    r.time_stationarity = std::abs(lhs - ch.p_c - d.phi) / phi_scale;
    r.complementary = d.phi * std::abs(d.t_off - ch.T) / (phi_scale * ch.T);
  }
  return r;
}

}  // namespace mrc
