#pragma once

// Brute-force grid references for the offloading and min-max problems. Each
// search has a serial reference and an OpenMP version that must return the
// identical grid point.

#include <cstddef>
#include <vector>

#include "mrc/model.hpp"
#include "mrc/mrc_rp.hpp"

namespace mrc {

struct P5GridResult {
  double D_off = 0.0;
  double t_off = 0.0;
  double energy = 0.0;  // compute + transmit + offload circuit
};

// D_off on `resolution` + 1 points over [mandatory, D], t_off on `resolution`
// points over (0, T]. Ties resolve to the smallest (D_off, t_off) index.
P5GridResult grid_search_p5(const OffloadChannel& channel, double D, int resolution);
P5GridResult grid_search_p5_serial(const OffloadChannel& channel, double D, int resolution);

P5GridResult grid_search_p5(const SlaveParams& params, double D, const TimeBudget& budget,
                            int resolution);

struct MinmaxResolution {
  int sensing = 1000;  // t_s points over [0, T_s]
  int offload = 100;   // D_off points over [mandatory, D]
  int time = 100;      // t_off points over (0, T]
};

struct MinmaxGridResult {
  std::vector<SlaveAllocation> slaves;
  std::vector<double> energies;
  double max_energy = 0.0;
  bool feasible = false;
};

// Exhaustive search for one or two robots: every (t_s, D_off, t_off) grid
// point per robot, then every sensing pair covering the demand within the
// reserves.
MinmaxGridResult grid_search_minmax(const std::vector<SlaveParams>& slaves,
                                    const std::vector<double>& reserves, double D,
                                    const TimeBudget& budget, const MinmaxResolution& res = {});
MinmaxGridResult grid_search_minmax_serial(const std::vector<SlaveParams>& slaves,
                                           const std::vector<double>& reserves, double D,
                                           const TimeBudget& budget,
                                           const MinmaxResolution& res = {});

}  // namespace mrc
