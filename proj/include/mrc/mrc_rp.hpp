#pragma once

// Robust scheme: remaining-energy weighted sensing LP followed by the
// threshold-based offloading policy, plus the per-robot closed-form
// processing cost that the min-max scheme also builds on.

#include <cstddef>
#include <string_view>
#include <vector>

#include "mrc/model.hpp"

namespace mrc {

enum class OffloadCase {
  kNoOffload,         // nothing leaves the robot
  kMandatoryMinimum,  // exactly the bits the local deadline cannot absorb
  kFullOffload,       // every collected bit is sent
  kWindowClamped,     // interior split at the threshold multiplier
};

std::string_view to_string(OffloadCase c);

// Priority indicator O = B*h*C*p_cmp / (N*ln2). O > 1 means a marginal bit is
// cheaper to send than to compute locally.
double priority_indicator(double B, double h, double C, double p_cmp, double N);

// gamma = (N/h)(O ln O - O + 1) for O >= 1, else 0.
double threshold_gamma(double O, double N, double h);

// Offload ratio D_off/t_off that satisfies the time stationarity condition
// for multiplier phi, via the Lambert-W closed form. 0 at phi = 0.
double offload_ratio(double phi, double B, double N, double h);

// Time-stationarity multiplier that makes `ratio` optimal: -g(ratio)/h.
double multiplier_for_ratio(double ratio, double B, double N, double h);

struct ThresholdProfile {
  double O = 0.0;
  double gamma = 0.0;
  double ratio_unconstrained = 0.0;  // B*log2(O) when O > 1, else 0
};

// Cost model for processing D bits inside one compute window: local CPU at
// `c` J/bit up to `local_bits`, the remainder (or any profitable share) sent
// over the link with the energy-optimal offload time.
struct OffloadChannel {
  double c = 0.0;           // local J/bit (C * p_cmp)
  double B = 0.0;
  double N = 0.0;
  double h = 0.0;
  double p_c = 0.0;         // circuit power while offloading
  double T = 0.0;           // compute/offload window
  double local_bits = 0.0;  // bits the CPU finishes inside T
  double C = 0.0;
  double p_cmp = 0.0;

  static OffloadChannel for_slave(const SlaveParams& p, const TimeBudget& budget);
  static OffloadChannel for_master(const MasterParams& p, const TimeBudget& budget);

  double priority() const;
  ThresholdProfile profile() const;
  // Smallest ratio worth using once circuit power is charged (0 without it).
  double min_ratio() const;
  double mandatory(double D) const;
  // Transmit + circuit energy for x bits with the best offload time.
  double tx_energy(double x) const;
  double tx_marginal(double x) const;
  double offload_time(double x) const;
  // Profitable offload ignoring the bounds [mandatory(D), D]; 0 if none.
  double unconstrained_offload() const;
  double optimal_offload(double D) const;
  // Minimum compute + transmit energy for D bits, and its derivative in D.
  double processing_energy(double D) const;
  double processing_marginal(double D) const;
};

struct RpDecision {
  double D_off = 0.0;
  double t_off = 0.0;
  double phi = 0.0;
  OffloadCase tag = OffloadCase::kNoOffload;
};

struct SensingPlan {
  std::vector<double> t_s;
  std::vector<double> D;
};

// beta_k = min(E_Re) / E_Re_k.
std::vector<double> fairness_weights(const std::vector<double>& reserves);

// Weighted sensing LP where each robot's reserve must cover sensing plus
// full local computation of its share. Ties go to the lower index.
SensingPlan solve_p4(const std::vector<SlaveParams>& slaves,
                     const std::vector<double>& reserves, const std::vector<double>& beta,
                     double D, double T_s);

// Threshold policy for one robot; phi is found by bisection on the offload
// ratio equation.
RpDecision solve_p5_channel(const OffloadChannel& channel, double D);

RpDecision solve_p5_per_slave(const SlaveParams& params, double D, const TimeBudget& budget);

std::vector<RpDecision> solve_p5(const std::vector<SlaveParams>& slaves,
                                 const std::vector<double>& D, const TimeBudget& budget);

RpDecision solve_master_rp(const MasterParams& master, double D_M, const TimeBudget& budget);

struct KktResiduals {
  double offload_stationarity = 0.0;
  double time_stationarity = 0.0;
  double primal = 0.0;
  double complementary = 0.0;

  double max() const;
};

// Normalized residuals of the offloading KKT system at `decision`.
KktResiduals kkt_residuals(const OffloadChannel& channel, double D, const RpDecision& decision);

}  // namespace mrc
