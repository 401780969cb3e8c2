#pragma once

// Min-max scheme: the epigraph problem over sensing and offloading, solved by
// dual decomposition (sensing LP, per-robot offloading, epigraph value) with
// projected subgradient ascent on the multipliers, plus the master problem.

#include <cstddef>
#include <vector>

#include "mrc/model.hpp"
#include "mrc/mrc_rp.hpp"

namespace mrc {

struct DualState {
  std::vector<double> lambda;  // reserve multipliers, >= 0
  std::vector<double> alpha;   // epigraph multipliers, on the simplex
  double eta0 = 0.1;

  static DualState initial(std::size_t K, double eta0 = 0.1);
};

enum class Sp2Method { kClosedForm, kBlockCoordinate };

struct OpOptions {
  double eta0 = 0.1;
  int max_iterations = 500;
  double primal_tol = 1e-4;  // J
  double gap_tol = 1e-3;     // relative to the primal value
  Sp2Method sp2 = Sp2Method::kClosedForm;
};

struct OffloadPlan {
  std::vector<double> D_off;
  std::vector<double> t_off;
};

struct OpSolution {
  Allocation allocation;
  std::vector<RpDecision> decisions;  // offloading detail and case per robot
  std::vector<EnergyBreakdown> energies;
  double e_star = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // e_star - dual_value, J
  DualState dual;
  int iterations = 0;
  std::vector<double> dual_history;  // best-so-far dual value per iteration
};

// Energy of a robot as a function of its sensed share, with the offloading
// split chosen optimally for that share.
struct SlaveCurve {
  SlaveParams params;
  OffloadChannel channel;
  double per_bit_sensing = 0.0;  // sensing + circuit energy per sensed bit
  double time_cap = 0.0;         // bits sensed in the full window

  SlaveCurve(const SlaveParams& p, const TimeBudget& budget);

  double energy(double D) const;
  double marginal(double D) const;
  // Largest D <= cap with energy(D) <= level.
  double max_bits(double level, double cap) const;
};

// Sensing LP with per-robot weights: min sum w_k (p_s + p_c) t_s subject to
// the demand and window. Ties go to the lower index.
SensingPlan solve_sp1(const std::vector<double>& weights, const std::vector<SlaveParams>& slaves,
                      double D, double T_s);

OffloadPlan solve_sp2(const std::vector<double>& weights, const std::vector<SlaveParams>& slaves,
                      const std::vector<double>& D_k, const TimeBudget& budget,
                      Sp2Method method = Sp2Method::kClosedForm);

// Epigraph value at the current primal point: max_k E_k. Alpha is checked for
// dual feasibility only.
double solve_sp3(const std::vector<double>& alpha, const std::vector<double>& energies);

DualState dual_step(const DualState& dual, const std::vector<double>& energies,
                    const std::vector<double>& reserves, double e_star, int iter);

// Exact dual function for the epigraph problem at (lambda, alpha).
double dual_function(const std::vector<SlaveCurve>& curves, const std::vector<double>& reserves,
                     const DualState& dual, double D);

OpSolution solve_p3(const std::vector<SlaveParams>& slaves, const std::vector<double>& reserves,
                    double D, const TimeBudget& budget, const OpOptions& options = {});

// Master offloading by block coordinate descent. Throws Infeasible when the
// cheapest split still exceeds the master's reserve.
RpDecision solve_p2_master(const MasterParams& master, double D_M, double reserve,
                           const TimeBudget& budget);

}  // namespace mrc
