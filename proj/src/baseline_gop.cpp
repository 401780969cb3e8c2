#include "mrc/baseline_gop.hpp"

#include <algorithm>
#include <cmath>

#include "mrc/errors.hpp"

namespace mrc {

RpDecision solve_gop_channel(const OffloadChannel& ch, double D) {
  if (!(D >= 0.0)) throw InvalidParameter("solve_gop: negative data size");
  const ThresholdProfile tp = ch.profile();
  const double lo = ch.mandatory(D);
  if (tp.O <= 1.0 || D == 0.0) {
    RpDecision d;
    if (lo > 0.0) {
      d.D_off = lo;
      d.t_off = ch.T;
      d.tag = OffloadCase::kMandatoryMinimum;
      d.phi = std::max(0.0, multiplier_for_ratio(lo / ch.T, ch.B, ch.N, ch.h) - ch.p_c);
    }
    return d;
  }

  const double ratio = tp.ratio_unconstrained;
  RpDecision d;
  if (D <= ratio * ch.T) {
    d.D_off = D;
    d.t_off = D / ratio;
    d.tag = OffloadCase::kFullOffload;
    return d;
  }
  // Window-limited: the local remainder must still fit the CPU deadline.
  d.D_off = std::max(ratio * ch.T, lo);
  d.t_off = ch.T;
  d.tag = d.D_off > ratio * ch.T ? OffloadCase::kMandatoryMinimum : OffloadCase::kWindowClamped;
  d.phi = std::max(0.0, multiplier_for_ratio(d.D_off / ch.T, ch.B, ch.N, ch.h) - ch.p_c);
  return d;
}

std::vector<RpDecision> solve_gop(const std::vector<SlaveParams>& slaves,
                                  const std::vector<double>& D_k, const TimeBudget& budget) {
  if (slaves.size() != D_k.size()) throw InvalidParameter("solve_gop: size mismatch");
  std::vector<RpDecision> out;
  out.reserve(slaves.size());
  for (std::size_t k = 0; k < slaves.size(); ++k) {
    out.push_back(solve_gop_channel(OffloadChannel::for_slave(slaves[k], budget), D_k[k]));
  }
  return out;
}

}  // namespace mrc
