// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: mrc_acceptance [scenario_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mrc/errors.hpp"
#include "mrc/mrc_op.hpp"
#include "mrc/mrc_rp.hpp"
#include "mrc/numerics.hpp"
#include "mrc/oracle.hpp"
#include "mrc/scenario_io.hpp"
#include "mrc/sim.hpp"
#include "test_support.hpp"

#ifndef MRC_SCENARIO_DIR
#define MRC_SCENARIO_DIR "scenarios"
#endif

namespace {

using mrc::EpisodeTrace;
using mrc::Policy;
using mrc::Scenario;
using Clock = std::chrono::steady_clock;

constexpr int kExtraSeeds = 20;

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double decision_energy(const mrc::OffloadChannel& ch, double D, const mrc::RpDecision& d) {
  double e = (D - d.D_off) * ch.c;
  if (d.D_off > 0.0) e += mrc::transmit_energy(d.D_off, d.t_off, ch.B, ch.N, ch.h) + ch.p_c * d.t_off;
  return e;
}

// Active during `task` means not retired at an earlier task.
bool all_active_during(const EpisodeTrace& t, int task) {
  if (task > t.tasks_completed) return false;
  for (const auto& d : t.first_deactivation) {
    if (d && *d < task) return false;
  }
  return true;
}

// Task at which SR3 retired; an SR3 that outlives the run counts as living
// for every completed task.
int sr3_lifetime(const EpisodeTrace& t) {
  return t.first_deactivation[2] ? *t.first_deactivation[2] : t.tasks_completed;
}

Scenario with_seed(Scenario sc, std::uint64_t seed) {
  sc.seed = seed;
  return sc;
}

std::vector<std::uint64_t> seed_list(const Scenario& base) {
  std::vector<std::uint64_t> seeds{*base.seed};
  for (std::uint64_t s = 1; s <= kExtraSeeds; ++s) seeds.push_back(s);
  return seeds;
}

// ---- 1: P5 against the grid oracle

struct P5Instance {
  mrc::SlaveParams params;
  mrc::TimeBudget budget;
  double D = 0.0;
};

std::vector<P5Instance> p5_instances() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<P5Instance> out;
  for (int i = 0; i < 200; ++i) {
    P5Instance in;
    in.params = mrc::testing::random_slave(rng, 1);
    in.budget = mrc::testing::table1_budget(i % 2 ? mrc::LocalWindow::kBitRate : mrc::LocalWindow::kCycleCount);
    in.D = 1e5 + 4.9e6 * u(rng);
    out.push_back(in);
  }
  return out;
}

void criterion1(const std::vector<P5Instance>& batch) {
  const auto t0 = Clock::now();
  int bad = 0;
  double worst = -INFINITY;
  for (const auto& in : batch) {
    const auto ch = mrc::OffloadChannel::for_slave(in.params, in.budget);
    const auto d = mrc::solve_p5_per_slave(in.params, in.D, in.budget);
    const double e = decision_energy(ch, in.D, d);
    const double g = mrc::grid_search_p5(in.params, in.D, in.budget, 200).energy;
    const double rel = (e - g) / g;
    worst = std::max(worst, rel);
    if (rel > 0.01) ++bad;
  }
  const double secs = seconds_since(t0);
  report(1, bad == 0 && secs < 60.0,
         fmt("%zu instances, worst (solver-grid)/grid %+.2e, %d above 1%%, %.1f s", batch.size(), worst, bad,
             secs));
}

// ---- 2: P3 against the two-robot min-max grid

void criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  const auto tb = mrc::testing::table1_budget(mrc::LocalWindow::kBitRate);
  const std::vector<double> reserves{3.0, 2.5};
  const double D = 3e6;
  int solved = 0, draws = 0, off = 0, gap_bad = 0;
  double worst = 0.0, worst_gap = 0.0;
  while (solved < 50 && draws < 500) {
    ++draws;
    std::vector<mrc::SlaveParams> s{mrc::testing::random_slave(rng, 1), mrc::testing::random_slave(rng, 2)};
    mrc::OpSolution sol;
    try {
      sol = mrc::solve_p3(s, reserves, D, tb);
    } catch (const mrc::Infeasible&) {
      continue;
    }
    ++solved;
    const auto grid = mrc::grid_search_minmax(s, reserves, D, tb, {1000, 60, 60});
    const double rel = grid.feasible ? std::abs(sol.e_star - grid.max_energy) / grid.max_energy : INFINITY;
    worst = std::max(worst, rel);
    if (rel > 0.01) ++off;
    const double g = sol.gap / sol.e_star;
    worst_gap = std::max(worst_gap, g);
    if (g > 1e-3) ++gap_bad;
  }
  const double secs = seconds_since(t0);
  report(2, solved == 50 && off == 0 && gap_bad == 0 && secs < 300.0,
         fmt("%d instances (%d draws), worst |rel| %.2e, worst gap %.2e, %.1f s", solved, draws, worst, worst_gap,
             secs));
}

// ---- 3: KKT residuals of every RP offloading decision

void criterion3(const std::vector<P5Instance>& batch, const std::vector<EpisodeTrace>& rp_traces,
                const mrc::TimeBudget& episode_budget) {
  int checked = 0, bad = 0;
  double worst = 0.0;
  auto check = [&](const mrc::SlaveParams& p, const mrc::TimeBudget& tb, double D) {
    const auto ch = mrc::OffloadChannel::for_slave(p, tb);
    const double r = mrc::kkt_residuals(ch, D, mrc::solve_p5_channel(ch, D)).max();
    worst = std::max(worst, r);
    ++checked;
    if (!(r <= 1e-6)) ++bad;
  };
  for (const auto& in : batch) check(in.params, in.budget, in.D);
  for (const auto& t : rp_traces) {
    for (const auto& row : t.rows) {
      if (row.robot_id == "M" || row.D <= 0.0) continue;
      check(t.hardware.slaves[std::stoul(row.robot_id) - 1], episode_budget, row.D);
    }
  }
  report(3, bad == 0 && checked > 0, fmt("%d decisions, worst residual %.2e", checked, worst));
}

// ---- 4: RP case tags on the default seed

void criterion4(const EpisodeTrace& rp) {
  static const char* want[] = {"no-offload", "full-offload", "full-offload"};
  int rows = 0, bad = 0;
  std::string first_bad;
  for (const auto& row : rp.rows) {
    if (row.robot_id == "M" || !all_active_during(rp, row.task)) continue;
    ++rows;
    if (row.case_tag != want[std::stoi(row.robot_id) - 1]) {
      if (bad++ == 0) first_bad = fmt("task %d SR%s %s", row.task, row.robot_id.c_str(), row.case_tag.c_str());
    }
  }
  report(4, rows > 0 && bad == 0,
         fmt("%d SR rows while all active, %d mismatched%s%s", rows, bad, bad ? ", first: " : "", first_bad.c_str()));
}

// ---- 5: OP <= RP and OP <= GOP per task

void criterion5(const std::vector<std::vector<EpisodeTrace>>& by_seed, const std::vector<std::uint64_t>& seeds) {
  int failed = 0, tasks = 0;
  std::string first;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& t = by_seed[i];
    bool ok = true;
    for (int task = 1;; ++task) {
      if (!all_active_during(t[0], task) || !all_active_during(t[1], task) || !all_active_during(t[2], task)) break;
      ++tasks;
      const double op = t[0].sr_energy_per_task[task - 1];
      const double rp = t[1].sr_energy_per_task[task - 1];
      const double gop = t[2].sr_energy_per_task[task - 1];
      if (op > rp || op > gop) {
        if (ok && first.empty()) first = fmt(" first: seed %llu task %d", (unsigned long long)seeds[i], task);
        ok = false;
      }
    }
    if (!ok) ++failed;
  }
  report(5, failed == 0 && tasks > 0,
         fmt("%zu seeds, %d compared tasks, %d seeds violating%s", seeds.size(), tasks, failed, first.c_str()));
}

// ---- 6: task energy non-increasing in T_s_cmp

void criterion6(const Scenario& base) {
  const std::vector<double> ms{10, 20, 30, 40};
  std::vector<mrc::EpisodeJob> jobs;
  for (Policy p : {Policy::kOp, Policy::kRp}) {
    for (double v : ms) {
      Scenario s = base;
      s.tasks = 1;
      mrc::set_scenario_value(s, "T_s_cmp_ms", v);
      jobs.push_back({s, p});
    }
  }
  const auto tr = mrc::run_batch(jobs);
  bool ok = true;
  std::string series;
  for (std::size_t p = 0; p < 2; ++p) {
    series += p ? " | rp" : "op";
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const auto& t = tr[p * ms.size() + i];
      if (t.tasks_completed < 1) {
        ok = false;
        series += " -";
        continue;
      }
      series += fmt(" %.4f", t.sr_energy_per_task[0]);
      if (i > 0 && tr[p * ms.size() + i - 1].tasks_completed >= 1 &&
          t.sr_energy_per_task[0] > tr[p * ms.size() + i - 1].sr_energy_per_task[0] + 1e-6) {
        ok = false;
      }
    }
  }
  report(6, ok, "T_s_cmp 10..40 ms, J: " + series);
}

// ---- 7: OP <= RP across a T_s sweep

void criterion7(const Scenario& base) {
  std::vector<double> ms;
  for (double v = 600; v <= 1200; v += 100) ms.push_back(v);
  std::vector<mrc::EpisodeJob> jobs;
  for (Policy p : {Policy::kOp, Policy::kRp}) {
    for (double v : ms) {
      Scenario s = base;
      s.tasks = 1;
      mrc::set_scenario_value(s, "T_s_ms", v);
      jobs.push_back({s, p});
    }
  }
  const auto tr = mrc::run_batch(jobs);
  int bad = 0;
  double worst = -INFINITY;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto& op = tr[i];
    const auto& rp = tr[ms.size() + i];
    if (op.tasks_completed < 1 || rp.tasks_completed < 1) {
      ++bad;
      continue;
    }
    worst = std::max(worst, op.sr_energy_per_task[0] - rp.sr_energy_per_task[0]);
    if (op.sr_energy_per_task[0] > rp.sr_energy_per_task[0]) ++bad;
  }
  report(7, bad == 0, fmt("T_s 600..1200 ms (%zu points), max OP-RP %.4f J, %d violations", ms.size(), worst, bad));
}

// ---- 8: channel drop

void criterion8(const Scenario& drop) {
  const auto seeds = seed_list(drop);
  std::vector<mrc::EpisodeJob> jobs;
  for (auto s : seeds) {
    for (Policy p : {Policy::kOp, Policy::kRp, Policy::kGop}) jobs.push_back({with_seed(drop, s), p});
  }
  const auto tr = mrc::run_batch(jobs);
  const auto& op = tr[0];
  const auto& rp = tr[1];
  const auto& gop = tr[2];
  auto off = [](const EpisodeTrace& t) { return t.first_deactivation[2].value_or(-1); };
  const int o = off(op), g = off(gop);
  const bool rp_alive = rp.tasks_completed >= 7 && (!rp.first_deactivation[2] || *rp.first_deactivation[2] > 7);
  const bool part1 = o >= 1 && o <= 7 && g >= 1 && g <= 7 && rp_alive;
  int later = 0;
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    if (sr3_lifetime(tr[3 * i + 1]) > sr3_lifetime(tr[3 * i])) ++later;
  }
  report(8, part1 && later >= 18,
         fmt("default seed SR3 off: OP %d, GOP %d, RP %s at task 7; RP later on %d/%d seeds", o, g,
             rp_alive ? "alive" : "dead", later, kExtraSeeds));
}

// ---- 9: RP keeps SR3 at least as long as OP

void criterion9(const std::vector<std::vector<EpisodeTrace>>& by_seed) {
  int ok = 0;
  for (const auto& t : by_seed) ok += sr3_lifetime(t[1]) >= sr3_lifetime(t[0]);
  report(9, ok == static_cast<int>(by_seed.size()), fmt("%d/%zu seeds", ok, by_seed.size()));
}

// ---- 10: numerical kernels

void criterion10() {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double w_worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = -1.0 / std::numbers::e + std::pow(10.0, -12.0 + 24.0 * u(rng));
    const double w = mrc::lambert_w0(x);
    w_worst = std::max(w_worst, std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x)));
  }

  const double B = 1e7, N = 1e-12;
  double id_worst = 0.0;
  for (double h : {1e-12, 1e-8, 1e-4}) {
    for (int i = 0; i < 2000; ++i) {
      const double O = 1.0 + std::pow(10.0, -6.0 + 15.0 * u(rng));
      if (O >= 1e9) continue;
      const double r = mrc::offload_ratio(mrc::threshold_gamma(O, N, h), B, N, h);
      const double want = B * std::log2(O);
      id_worst = std::max(id_worst, std::abs(r - want) / want);
    }
  }

  int mono_bad = 0;
  auto gamma = [&](double h, double C, double p) {
    return mrc::threshold_gamma(mrc::priority_indicator(B, h, C, p, N), N, h);
  };
  for (double h : {1e-12, 1e-10, 1e-8, 1e-6, 1e-4}) {
    for (double C : {100.0, 300.0, 1000.0}) {
      for (double p : {1e-9, 3e-9, 5e-9}) {
        const double g0 = gamma(h, C, p);
        const double tol = 1e-12 * std::max(1.0, g0);
        if (gamma(h * 1.001, C, p) < g0 - tol) ++mono_bad;
        if (gamma(h, C * 1.001, p) < g0 - tol) ++mono_bad;
        if (gamma(h, C, p * 1.001) < g0 - tol) ++mono_bad;
      }
    }
  }
  report(10, w_worst <= 1e-10 && id_worst <= 1e-9 && mono_bad == 0,
         fmt("W residual %.1e, ratio identity %.1e, gamma monotonicity violations %d", w_worst, id_worst, mono_bad));
}

// ---- 11: conservation and determinism

double conservation_error(const EpisodeTrace& t) {
  double worst = 0.0;
  const auto totals = t.sr_energy_totals();
  for (std::size_t k = 0; k < totals.size(); ++k) {
    worst = std::max(worst, std::abs(t.initial_reserves[k] - totals[k] - t.final_state.reserves[k]));
  }
  return std::max(worst, std::abs(t.initial_master_reserve - t.master_energy_total() - t.final_state.master_reserve));
}

std::string csv_of(const EpisodeTrace& t) {
  std::ostringstream s;
  mrc::write_trace_csv(t, s);
  return s.str() + mrc::summary_json(t);
}

void criterion11(const std::vector<std::vector<EpisodeTrace>>& by_seed, const Scenario& base, const Scenario& drop) {
  double worst = 0.0;
  for (const auto& ts : by_seed) {
    for (const auto& t : ts) worst = std::max(worst, conservation_error(t));
  }
  std::vector<mrc::EpisodeJob> jobs;
  for (const Scenario* s : {&base, &drop}) {
    for (Policy p : {Policy::kOp, Policy::kRp, Policy::kGop}) jobs.push_back({*s, p});
  }
  const auto a = mrc::run_batch(jobs);
  const auto b = mrc::run_batch(jobs);
  const auto c = mrc::run_batch_serial(jobs);
  bool same = true;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto ref = csv_of(a[i]);
    same = same && ref == csv_of(b[i]) && ref == csv_of(c[i]);
    worst = std::max(worst, conservation_error(a[i]));
  }
  report(11, worst <= 1e-12 && same,
         fmt("max conservation error %.1e J, reruns %s", worst, same ? "bit-identical" : "differ"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : MRC_SCENARIO_DIR;
  Scenario base, drop;
  try {
    base = mrc::load_scenario(dir / "table1.json");
    drop = mrc::load_scenario(dir / "channel_drop.json");
  } catch (const mrc::Error& e) {
    std::fprintf(stderr, "cannot load scenarios: %s\n", e.what());
    return 2;
  }

  const auto seeds = seed_list(base);
  std::vector<mrc::EpisodeJob> jobs;
  for (auto s : seeds) {
    for (Policy p : {Policy::kOp, Policy::kRp, Policy::kGop}) jobs.push_back({with_seed(base, s), p});
  }
  const auto flat = mrc::run_batch(jobs);
  std::vector<std::vector<EpisodeTrace>> by_seed;
  std::vector<EpisodeTrace> rp_traces;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    by_seed.push_back({flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]});
    rp_traces.push_back(flat[3 * i + 1]);
  }

  const auto batch = p5_instances();
  criterion1(batch);
  criterion2();
  criterion3(batch, rp_traces, base.budget);
  criterion4(by_seed[0][1]);
  criterion5(by_seed, seeds);
  criterion6(base);
  criterion7(base);
  criterion8(drop);
  criterion9(by_seed);
  criterion10();
  criterion11(by_seed, base, drop);

  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
