#include "mrc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrc/errors.hpp"

namespace mrc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double split_energy(const OffloadChannel& ch, double D, double x, double t) {
  double e = (D - x) * ch.c;
  if (x > 0.0) e += transmit_energy(x, t, ch.B, ch.N, ch.h) + ch.p_c * t;
  return e;
}

struct RowBest {
  double energy = kInf;
  int j = 0;
};

RowBest scan_row(const OffloadChannel& ch, double D, double x, int n_time) {
  RowBest best;
  for (int j = 1; j <= n_time; ++j) {
    const double e = split_energy(ch, D, x, ch.T * j / n_time);
    if (e < best.energy) {
      best.energy = e;
      best.j = j;
    }
    if (x == 0.0) break;
  }
  return best;
}

double grid_offload(const OffloadChannel& ch, double D, int i, int n) {
  const double lo = ch.mandatory(D);
  return i == n ? D : lo + (D - lo) * i / n;
}

P5GridResult reduce_p5(const OffloadChannel& ch, double D, int n, int n_time,
                       const std::vector<RowBest>& rows) {
  P5GridResult out;
  out.energy = kInf;
  for (int i = 0; i <= n; ++i) {
    if (rows[i].energy < out.energy) {
      out.energy = rows[i].energy;
      out.D_off = grid_offload(ch, D, i, n);
      out.t_off = out.D_off > 0.0 ? ch.T * rows[i].j / n_time : 0.0;
    }
  }
  return out;
}

P5GridResult p5_impl(const OffloadChannel& ch, double D, int n, bool parallel) {
  if (n < 1) throw InvalidParameter("grid_search_p5: resolution must be positive");
  if (!(D >= 0.0)) throw InvalidParameter("grid_search_p5: negative data size");
  if (D == 0.0) return {};
  std::vector<RowBest> rows(n + 1);
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i <= n; ++i) rows[i] = scan_row(ch, D, grid_offload(ch, D, i, n), n);
  return reduce_p5(ch, D, n, n, rows);
}

struct SenseRow {
  double D = 0.0;
  double t_s = 0.0;
  double energy = kInf;
  double D_off = 0.0;
  double t_off = 0.0;
};

// Best energy per sensing grid point for one robot.
std::vector<SenseRow> sense_table(const SlaveParams& p, const TimeBudget& budget,
                                  const MinmaxResolution& res, bool parallel) {
  const OffloadChannel ch = OffloadChannel::for_slave(p, budget);
  std::vector<SenseRow> table(res.sensing + 1);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i <= res.sensing; ++i) {
    SenseRow row;
    row.t_s = budget.T_s * i / res.sensing;
    row.D = sensed_bits(p.p_s, row.t_s, p.e_s);
    const double sense = p.p_s * row.t_s + p.p_c * row.t_s;
    double best = kInf;
    if (row.D == 0.0) {
      best = 0.0;
    } else {
      for (int a = 0; a <= res.offload; ++a) {
        const double x = grid_offload(ch, row.D, a, res.offload);
        const RowBest rb = scan_row(ch, row.D, x, res.time);
        if (rb.energy < best) {
          best = rb.energy;
          row.D_off = x;
          row.t_off = x > 0.0 ? ch.T * rb.j / res.time : 0.0;
        }
      }
    }
    row.energy = sense + best;
    table[i] = row;
  }
  return table;
}

MinmaxGridResult minmax_impl(const std::vector<SlaveParams>& slaves,
                             const std::vector<double>& reserves, double D,
                             const TimeBudget& budget, const MinmaxResolution& res,
                             bool parallel) {
  const std::size_t K = slaves.size();
  if (K == 0 || K > 2) throw InvalidParameter("grid_search_minmax: supports one or two robots");
  if (reserves.size() != K) throw InvalidParameter("grid_search_minmax: size mismatch");
  if (res.sensing < 1 || res.offload < 1 || res.time < 1) {
    throw InvalidParameter("grid_search_minmax: resolutions must be positive");
  }
  std::vector<std::vector<SenseRow>> tables;
  for (const auto& s : slaves) tables.push_back(sense_table(s, budget, res, parallel));

  const double need = D * (1.0 - 1e-12);
  auto ok = [&](std::size_t k, const SenseRow& r) { return r.energy <= reserves[k]; };

  MinmaxGridResult out;
  out.max_energy = kInf;
  auto take = [&](std::vector<const SenseRow*> rows, double value) {
    out.max_energy = value;
    out.feasible = true;
    out.slaves.clear();
    out.energies.clear();
    for (const auto* r : rows) {
      out.slaves.push_back({r->t_s, r->D, r->D_off, r->t_off});
      out.energies.push_back(r->energy);
    }
  };

  if (K == 1) {
    for (const auto& r : tables[0]) {
      if (r.D >= need && ok(0, r) && r.energy < out.max_energy) take({&r}, r.energy);
    }
    return out;
  }

  const int n = res.sensing;
  std::vector<double> best(n + 1, kInf);
  std::vector<int> best_j(n + 1, -1);
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i <= n; ++i) {
    const auto& r1 = tables[0][i];
    if (!ok(0, r1)) continue;
    for (int j = 0; j <= n; ++j) {
      const auto& r2 = tables[1][j];
      if (r1.D + r2.D < need || !ok(1, r2)) continue;
      const double v = std::max(r1.energy, r2.energy);
      if (v < best[i]) {
        best[i] = v;
        best_j[i] = j;
      }
    }
  }
  for (int i = 0; i <= n; ++i) {
    if (best_j[i] >= 0 && best[i] < out.max_energy) {
      take({&tables[0][i], &tables[1][best_j[i]]}, best[i]);
    }
  }
  return out;
}

}  // namespace

P5GridResult grid_search_p5(const OffloadChannel& channel, double D, int resolution) {
  return p5_impl(channel, D, resolution, true);
}

P5GridResult grid_search_p5_serial(const OffloadChannel& channel, double D, int resolution) {
  return p5_impl(channel, D, resolution, false);
}

P5GridResult grid_search_p5(const SlaveParams& params, double D, const TimeBudget& budget,
                            int resolution) {
  return grid_search_p5(OffloadChannel::for_slave(params, budget), D, resolution);
}

MinmaxGridResult grid_search_minmax(const std::vector<SlaveParams>& slaves,
                                    const std::vector<double>& reserves, double D,
                                    const TimeBudget& budget, const MinmaxResolution& res) {
  return minmax_impl(slaves, reserves, D, budget, res, true);
}

MinmaxGridResult grid_search_minmax_serial(const std::vector<SlaveParams>& slaves,
                                           const std::vector<double>& reserves, double D,
                                           const TimeBudget& budget,
                                           const MinmaxResolution& res) {
  return minmax_impl(slaves, reserves, D, budget, res, false);
}

}  // namespace mrc
