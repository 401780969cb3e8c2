#include "mrc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "mrc/baseline_gop.hpp"
#include "mrc/errors.hpp"

namespace mrc {

ParamSpec ParamSpec::fixed(double v) {
  ParamSpec s;
  s.lo = s.hi = v;
  return s;
}

ParamSpec ParamSpec::range(double lo, double hi, bool decibel) {
  ParamSpec s;
  s.kind = Kind::kRange;
  s.lo = std::min(lo, hi);
  s.hi = std::max(lo, hi);
  s.decibel = decibel;
  return s;
}

ParamSpec ParamSpec::one_of(std::vector<double> values) {
  ParamSpec s;
  s.kind = Kind::kChoice;
  s.choices = std::move(values);
  return s;
}

void ParamSpec::validate(const std::string& name) const {
  auto bad = [&](const std::string& why) { throw ConfigError(name + ": " + why); };
  switch (kind) {
    case Kind::kFixed:
      if (!std::isfinite(lo)) bad("value must be finite");
      break;
    case Kind::kRange:
      if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo <= hi)) bad("range must be [lo, hi]");
      if (decibel && !(lo > 0.0)) bad("decibel range needs positive watts");
      break;
    case Kind::kChoice:
      if (choices.empty()) bad("one_of needs at least one value");
      for (double v : choices) {
        if (!std::isfinite(v)) bad("one_of values must be finite");
      }
      break;
  }
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double ParamSpec::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::kFixed:
      return lo;
    case Kind::kRange: {
      const double u = unit_uniform(rng);
      if (decibel) {
        const double a = watts_to_dbm(lo), b = watts_to_dbm(hi);
        return dbm_to_watts(a + (b - a) * u);
      }
      return lo + (hi - lo) * u;
    }
    case Kind::kChoice: {
      const double u = unit_uniform(rng);
      const auto i = std::min(choices.size() - 1, static_cast<std::size_t>(u * choices.size()));
      return choices[i];
    }
  }
  return lo;
}

bool Scenario::has_random_parameters() const {
  auto any = [](std::initializer_list<const ParamSpec*> specs) {
    return std::any_of(specs.begin(), specs.end(), [](const ParamSpec* p) { return p->is_random(); });
  };
  for (const auto& s : slaves) {
    if (any({&s.e_s, &s.p_s, &s.C, &s.U, &s.p_cmp, &s.p_c, &s.B, &s.N})) return true;
    if (s.h && s.h->is_random()) return true;
    if (s.distance && s.distance->is_random()) return true;
  }
  const auto& m = master;
  return any({&m.C_M, &m.U_M, &m.p_cmp_M, &m.p_c_M, &m.B_M, &m.N_1, &m.h_M});
}

void Scenario::validate() const {
  if (slaves.empty()) throw ConfigError("slaves: at least one slave robot is required");
  for (std::size_t k = 0; k < slaves.size(); ++k) {
    const auto& s = slaves[k];
    const std::string p = "slaves[" + std::to_string(k) + "].";
    s.e_s.validate(p + "e_s");
    s.p_s.validate(p + "p_s");
    s.C.validate(p + "C");
    s.U.validate(p + "U");
    s.p_cmp.validate(p + "p_cmp");
    s.p_c.validate(p + "p_c");
    s.B.validate(p + "B");
    s.N.validate(p + "N");
    if (s.h.has_value() == s.distance.has_value()) {
      throw ConfigError(p + "h: give exactly one of a gain or a distance");
    }
    if (s.h) s.h->validate(p + "h");
    if (s.distance) s.distance->validate(p + "distance");
    if (!(s.E_init > 0.0)) throw ConfigError(p + "E_init: must be positive (J)");
  }
  master.C_M.validate("master.C");
  master.U_M.validate("master.U");
  master.p_cmp_M.validate("master.p_cmp");
  master.p_c_M.validate("master.p_c");
  master.B_M.validate("master.B");
  master.N_1.validate("master.N");
  master.h_M.validate("master.h");
  if (!(master.E_init_M > 0.0)) throw ConfigError("master.E_init: must be positive (J)");
  try {
    budget.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("time budget: ") + e.what());
  }
  if (!(task_bits >= 0.0) || !std::isfinite(task_bits)) throw ConfigError("task_bits: must be >= 0 (bits)");
  if (!(low_power_threshold >= 0.0)) throw ConfigError("low_power_threshold: must be >= 0 (J)");
  if (tasks < 0) throw ConfigError("tasks: must be >= 0");
  if (has_random_parameters() && !seed) {
    throw ConfigError("seed: required when any parameter is a range or one_of");
  }
  for (const auto& o : channel_schedule) {
    if (o.task < 1) throw ConfigError("channel_schedule: task indices start at 1");
    if (o.robot != ChannelOverride::kAllSlaves && o.robot != ChannelOverride::kMasterRobot &&
        (o.robot < 1 || o.robot > static_cast<int>(slaves.size()))) {
      throw ConfigError("channel_schedule: robot " + std::to_string(o.robot) + " does not exist");
    }
    if (!(o.gain > 0.0 && o.gain <= 1.0)) throw ConfigError("channel_schedule: gain must be in (0, 1]");
  }
}

Hardware sample_hardware(const Scenario& scenario) {
  std::mt19937_64 rng(scenario.seed.value_or(0));
  Hardware hw;
  for (std::size_t k = 0; k < scenario.slaves.size(); ++k) {
    const auto& s = scenario.slaves[k];
    SlaveParams p;
    p.id = k + 1;
    p.e_s = s.e_s.sample(rng);
    p.p_s = s.p_s.sample(rng);
    p.C = s.C.sample(rng);
    p.U = s.U.sample(rng);
    p.p_cmp = s.p_cmp.sample(rng);
    p.p_c = s.p_c.sample(rng);
    p.B = s.B.sample(rng);
    p.N = s.N.sample(rng);
    p.h = s.h ? s.h->sample(rng) : path_gain(s.distance->sample(rng), s.path_loss_exponent);
    p.E_init = s.E_init;
    try {
      p.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError("slave " + std::to_string(k + 1) + ": " + e.what());
    }
    hw.slaves.push_back(p);
  }
  const auto& m = scenario.master;
  hw.master.C_M = m.C_M.sample(rng);
  hw.master.U_M = m.U_M.sample(rng);
  hw.master.p_cmp_M = m.p_cmp_M.sample(rng);
  hw.master.p_c_M = m.p_c_M.sample(rng);
  hw.master.B_M = m.B_M.sample(rng);
  hw.master.N_1 = m.N_1.sample(rng);
  hw.master.h_M = m.h_M.sample(rng);
  hw.master.E_init_M = m.E_init_M;
  try {
    hw.master.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("master: ") + e.what());
  }
  return hw;
}

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::kOp:
      return "op";
    case Policy::kRp:
      return "rp";
    case Policy::kGop:
      return "gop";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  if (name == "op") return Policy::kOp;
  if (name == "rp") return Policy::kRp;
  if (name == "gop") return Policy::kGop;
  throw ConfigError("policy: expected op, rp or gop, got '" + std::string(name) + "'");
}

SystemState initial_state(const Hardware& hw, double threshold) {
  SystemState st;
  for (const auto& s : hw.slaves) {
    st.reserves.push_back(s.E_init);
    st.active.push_back(s.E_init >= threshold);
  }
  st.master_reserve = hw.master.E_init_M;
  return st;
}

SystemState apply_task(const SystemState& state, const std::vector<EnergyBreakdown>& slaves,
                       const EnergyBreakdown& master, double threshold) {
  if (slaves.size() != state.reserves.size()) throw InvalidParameter("apply_task: size mismatch");
  SystemState next = state;
  for (std::size_t k = 0; k < slaves.size(); ++k) {
    if (!(slaves[k].E_tot >= 0.0)) throw InvalidParameter("apply_task: negative energy");
    next.reserves[k] = state.reserves[k] - slaves[k].E_tot;
    if (next.reserves[k] < 0.0) {
      throw InvariantViolation("apply_task: slave " + std::to_string(k + 1) +
                               " reserve would go negative");
    }
    next.active[k] = state.active[k] && next.reserves[k] >= threshold;
  }
  if (!(master.E_tot >= 0.0)) throw InvalidParameter("apply_task: negative master energy");
  next.master_reserve = state.master_reserve - master.E_tot;
  if (next.master_reserve < 0.0) {
    throw InvariantViolation("apply_task: master reserve would go negative");
  }
  ++next.task;
  return next;
}

std::vector<double> EpisodeTrace::sr_energy_totals() const {
  std::vector<double> totals(hardware.slaves.size(), 0.0);
  for (const auto& r : rows) {
    if (r.robot_id == "M") continue;
    totals[std::stoul(r.robot_id) - 1] += r.energy.E_tot;
  }
  return totals;
}

double EpisodeTrace::master_energy_total() const {
  double total = 0.0;
  for (const auto& r : rows) {
    if (r.robot_id == "M") total += r.energy.E_tot;
  }
  return total;
}

namespace {

struct SlaveStage {
  std::vector<SlaveAllocation> alloc;
  std::vector<EnergyBreakdown> energy;
  std::vector<std::string> tags;
  std::optional<double> gap;
};

SlaveStage solve_slave_stage(Policy policy, const std::vector<SlaveParams>& params,
                             const std::vector<double>& reserves, double D,
                             const TimeBudget& budget, const OpOptions& op) {
  SlaveStage out;
  const std::size_t n = params.size();
  out.alloc.resize(n);
  out.energy.resize(n);
  out.tags.resize(n);
  std::vector<RpDecision> dec;
  if (policy == Policy::kOp) {
    const OpSolution sol = solve_p3(params, reserves, D, budget, op);
    out.alloc = sol.allocation.slaves;
    dec = sol.decisions;
    out.gap = sol.gap;
  } else {
    const auto beta = policy == Policy::kRp ? fairness_weights(reserves) : std::vector<double>(n, 1.0);
    const SensingPlan plan = solve_p4(params, reserves, beta, D, budget.T_s);
    dec = policy == Policy::kRp ? solve_p5(params, plan.D, budget) : solve_gop(params, plan.D, budget);
    for (std::size_t i = 0; i < n; ++i) {
      out.alloc[i] = {plan.t_s[i], plan.D[i], dec[i].D_off, dec[i].t_off};
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = out.alloc[i];
    out.energy[i] = slave_energy(params[i], a.t_s, a.D, a.D_off, a.t_off);
    out.tags[i] = std::string(to_string(dec[i].tag));
  }
  return out;
}

}  // namespace

EpisodeTrace run_episode(const Scenario& scenario, Policy policy, const EpisodeOptions& opts) {
  scenario.validate();
  EpisodeTrace tr;
  tr.policy = policy;
  tr.hardware = sample_hardware(scenario);
  const std::size_t K = tr.hardware.slaves.size();
  const double threshold = scenario.low_power_threshold;
  SystemState st = initial_state(tr.hardware, threshold);
  tr.initial_reserves = st.reserves;
  tr.initial_master_reserve = st.master_reserve;
  tr.first_deactivation.assign(K, std::nullopt);
  for (std::size_t k = 0; k < K; ++k) {
    if (!st.active[k]) tr.first_deactivation[k] = 0;
  }

  std::vector<double> gains(K);
  for (std::size_t k = 0; k < K; ++k) gains[k] = tr.hardware.slaves[k].h;
  double master_gain = tr.hardware.master.h_M;

  tr.termination_reason = "completed";
  for (int task = 1; task <= scenario.tasks; ++task) {
    for (const auto& o : scenario.channel_schedule) {
      if (o.task != task) continue;
      if (o.robot == ChannelOverride::kMasterRobot) {
        master_gain = o.gain;
      } else if (o.robot == ChannelOverride::kAllSlaves) {
        std::fill(gains.begin(), gains.end(), o.gain);
      } else {
        gains[o.robot - 1] = o.gain;
      }
    }

    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < K; ++k) {
      if (st.active[k]) active.push_back(k);
    }
    if (active.empty()) {
      tr.termination_reason = "no-active-slaves";
      break;
    }
    std::vector<SlaveParams> params;
    std::vector<double> reserves;
    for (std::size_t k : active) {
      params.push_back(tr.hardware.slaves[k]);
      params.back().h = gains[k];
      reserves.push_back(st.reserves[k]);
    }

    SlaveStage stage;
    try {
      stage = solve_slave_stage(policy, params, reserves, scenario.task_bits, scenario.budget, opts.op);
    } catch (const Infeasible& e) {
      tr.termination_reason = std::string("infeasible: ") + e.what();
      break;
    }

    std::vector<EnergyBreakdown> energy(K);
    std::vector<SlaveAllocation> alloc(K);
    std::vector<std::string> tags(K, "inactive");
    bool overdrawn = false;
    double D_M = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t k = active[i];
      energy[k] = stage.energy[i];
      alloc[k] = stage.alloc[i];
      tags[k] = stage.tags[i];
      D_M += alloc[k].D_off;
      if (energy[k].E_tot > st.reserves[k]) {
        tr.termination_reason = "reserve-exceeded: slave " + std::to_string(k + 1);
        overdrawn = true;
        break;
      }
    }
    if (overdrawn) break;

    MasterParams master = tr.hardware.master;
    master.h_M = master_gain;
    RpDecision md;
    EnergyBreakdown me;
    std::string master_tag = "exhausted";
    bool exhausted_now = false;
    if (!st.master_exhausted) {
      bool fits = true;
      try {
        md = policy == Policy::kOp ? solve_p2_master(master, D_M, st.master_reserve, scenario.budget)
                                   : solve_master_rp(master, D_M, scenario.budget);
        me = master_energy(master, D_M, md.D_off, md.t_off);
        fits = me.E_tot <= st.master_reserve;
      } catch (const Infeasible&) {
        fits = false;
      }
      if (fits) {
        master_tag = std::string(to_string(md.tag));
      } else if (scenario.on_master_exhausted == MasterExhaustion::kEndEpisode) {
        tr.termination_reason = "master-exhausted";
        break;
      } else {
        exhausted_now = true;
        md = {};
        me = {};
      }
    }

    const std::vector<bool> was_active = st.active;
    st = apply_task(st, energy, me, threshold);
    if (exhausted_now) {
      st.master_exhausted = true;
      tr.master_exhausted_task = task;
    }

    double sr_total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      if (was_active[k] && !st.active[k]) tr.first_deactivation[k] = task;
      TraceRow row;
      row.task = task;
      row.robot_id = std::to_string(k + 1);
      row.active = st.active[k];
      row.t_s = alloc[k].t_s;
      row.D = alloc[k].D;
      row.D_off = alloc[k].D_off;
      row.t_off = alloc[k].t_off;
      row.energy = energy[k];
      row.E_remaining = st.reserves[k];
      row.case_tag = tags[k];
      if (was_active[k]) row.dual_gap = stage.gap;
      tr.rows.push_back(row);
      sr_total += energy[k].E_tot;
    }
    TraceRow mrow;
    mrow.task = task;
    mrow.robot_id = "M";
    mrow.active = !st.master_exhausted;
    mrow.D = st.master_exhausted && !exhausted_now ? 0.0 : D_M;
    mrow.D_off = md.D_off;
    mrow.t_off = md.t_off;
    mrow.energy = me;
    mrow.E_remaining = st.master_reserve;
    mrow.case_tag = master_tag;
    tr.rows.push_back(mrow);

    tr.sr_energy_per_task.push_back(sr_total);
    tr.system_energy_per_task.push_back(sr_total + me.E_tot);
    tr.tasks_completed = task;
  }
  tr.final_state = st;
  return tr;
}

std::vector<EpisodeTrace> run_batch_serial(const std::vector<EpisodeJob>& jobs,
                                           const EpisodeOptions& opts) {
  std::vector<EpisodeTrace> out;
  out.reserve(jobs.size());
  for (const auto& j : jobs) out.push_back(run_episode(j.scenario, j.policy, opts));
  return out;
}

std::vector<EpisodeTrace> run_batch(const std::vector<EpisodeJob>& jobs, const EpisodeOptions& opts) {
  std::vector<EpisodeTrace> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = run_episode(jobs[i].scenario, jobs[i].policy, opts);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace mrc
