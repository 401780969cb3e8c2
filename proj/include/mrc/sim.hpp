#pragma once

// Multi-task episode engine. Hardware is drawn once per episode from the
// scenario's ranges; each task runs the slave stage and the master stage of
// the chosen policy, then debits batteries and retires robots that fall under
// the low-power threshold.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/model.hpp"
#include "mrc/mrc_op.hpp"
#include "mrc/mrc_rp.hpp"

namespace mrc {

// A scenario value: fixed, uniform on [lo, hi], or one of a list. With
// `decibel` set, ranges are sampled uniformly in dB and stored in watts.
struct ParamSpec {
  enum class Kind { kFixed, kRange, kChoice };
  Kind kind = Kind::kFixed;
  double lo = 0.0;  // the fixed value when kind == kFixed
  double hi = 0.0;
  std::vector<double> choices;
  bool decibel = false;

  static ParamSpec fixed(double v);
  static ParamSpec range(double lo, double hi, bool decibel = false);
  static ParamSpec one_of(std::vector<double> values);

  bool is_random() const { return kind != Kind::kFixed; }
  void validate(const std::string& name) const;
  double sample(std::mt19937_64& rng) const;

  bool operator==(const ParamSpec&) const = default;
};

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng);

struct SlaveSpec {
  ParamSpec e_s, p_s, C, U, p_cmp, p_c, B, N;
  // Either a gain or a distance with path-loss exponent.
  std::optional<ParamSpec> h;
  std::optional<ParamSpec> distance;
  double path_loss_exponent = 3.75;
  double E_init = 0.0;

  bool operator==(const SlaveSpec&) const = default;
};

struct MasterSpec {
  ParamSpec C_M, U_M, p_cmp_M, p_c_M, B_M, N_1, h_M;
  double E_init_M = 0.0;

  bool operator==(const MasterSpec&) const = default;
};

// Gain change from `task` (1-based) onward. robot: 1..K for one slave,
// kAllSlaves for every slave, kMasterRobot for the master link.
struct ChannelOverride {
  static constexpr int kAllSlaves = -1;
  static constexpr int kMasterRobot = 0;
  int task = 1;
  int robot = kAllSlaves;
  double gain = 0.0;

  bool operator==(const ChannelOverride&) const = default;
};

enum class MasterExhaustion {
  kEndEpisode,  // the task that would overdraw the master ends the run
  kContinue,    // master stops processing; slaves keep running
};

struct Scenario {
  std::vector<SlaveSpec> slaves;
  MasterSpec master;
  TimeBudget budget;
  double task_bits = 0.0;
  double low_power_threshold = 0.0;
  int tasks = 0;
  std::optional<std::uint64_t> seed;
  std::vector<ChannelOverride> channel_schedule;
  MasterExhaustion on_master_exhausted = MasterExhaustion::kEndEpisode;

  bool has_random_parameters() const;
  // Throws ConfigError naming the offending field.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

struct Hardware {
  std::vector<SlaveParams> slaves;
  MasterParams master;
};

// Draws every ranged parameter in a fixed order: slaves by index, fields in
// declaration order, then the master.
Hardware sample_hardware(const Scenario& scenario);

enum class Policy { kOp, kRp, kGop };

std::string_view to_string(Policy p);
Policy parse_policy(std::string_view name);

struct SystemState {
  std::vector<double> reserves;
  double master_reserve = 0.0;
  std::vector<bool> active;
  bool master_exhausted = false;
  int task = 0;
};

SystemState initial_state(const Hardware& hw, double threshold);

// Debits one task's energies. Robots only ever leave the active set.
SystemState apply_task(const SystemState& state, const std::vector<EnergyBreakdown>& slaves,
                       const EnergyBreakdown& master, double threshold);

struct TraceRow {
  int task = 0;
  std::string robot_id;  // "1".."K" or "M"
  bool active = false;   // after the task
  double t_s = 0.0;
  double D = 0.0;
  double D_off = 0.0;
  double t_off = 0.0;
  EnergyBreakdown energy;
  double E_remaining = 0.0;
  std::string case_tag;
  std::optional<double> dual_gap;
};

struct EpisodeTrace {
  Policy policy = Policy::kOp;
  Hardware hardware;
  std::vector<TraceRow> rows;
  int tasks_completed = 0;
  std::string termination_reason;
  SystemState final_state;
  std::vector<double> initial_reserves;
  double initial_master_reserve = 0.0;
  // Per slave: 0 if inactive from the start, task index otherwise.
  std::vector<std::optional<int>> first_deactivation;
  std::optional<int> master_exhausted_task;
  std::vector<double> sr_energy_per_task;
  std::vector<double> system_energy_per_task;

  std::vector<double> sr_energy_totals() const;
  double master_energy_total() const;
};

struct EpisodeOptions {
  OpOptions op;
};

EpisodeTrace run_episode(const Scenario& scenario, Policy policy, const EpisodeOptions& opts = {});

struct EpisodeJob {
  Scenario scenario;
  Policy policy = Policy::kOp;
};

// Independent episodes, results in job order. The parallel version spreads
// jobs over OpenMP threads.
std::vector<EpisodeTrace> run_batch(const std::vector<EpisodeJob>& jobs,
                                    const EpisodeOptions& opts = {});
std::vector<EpisodeTrace> run_batch_serial(const std::vector<EpisodeJob>& jobs,
                                           const EpisodeOptions& opts = {});

}  // namespace mrc
