#pragma once

// Greedy offloading baseline: send as many bits as the window allows at the
// fixed energy-optimal ratio B*log2(O), compute the rest locally.

#include <vector>

#include "mrc/model.hpp"
#include "mrc/mrc_rp.hpp"

namespace mrc {

RpDecision solve_gop_channel(const OffloadChannel& channel, double D);

std::vector<RpDecision> solve_gop(const std::vector<SlaveParams>& slaves,
                                  const std::vector<double>& D_k, const TimeBudget& budget);

}  // namespace mrc
