#pragma once

// Scenario files (JSON) and trace output (CSV + JSON summary).
//
// Every physical value is keyed by its unit, e.g. "N_dBm" or "T_s_cmp_ms".
// A value is a number, a [lo, hi] range, or {"one_of": [...]}. Ranges on a
// dBm key are uniform in dB; on a watt key use {"uniform_dB": [lo, hi]}.
// Loading normalizes to SI. Saving writes SI keys so a load reproduces the
// scenario bit for bit.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/sim.hpp"

namespace mrc {

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);
std::string dump_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Overwrites one scalar field, addressed by any key load_scenario accepts
// (value in that key's unit). Slave keys hit every slave; "master." prefixes
// address the master; "slaves.K." addresses slave K (1-based).
void set_scenario_value(Scenario& scenario, std::string_view key, double value);

inline constexpr std::string_view kTraceColumns =
    "task,robot_id,active,t_s,D,D_off,t_off,E_s,E_cmp,E_tr,E_circ,E_tot,E_remaining,case_tag,dual_gap";

void write_trace_csv(const EpisodeTrace& trace, std::ostream& out);
std::string summary_json(const EpisodeTrace& trace);

// Writes <dir>/<stem>_trace.csv and <dir>/<stem>_summary.json.
void emit_trace(const EpisodeTrace& trace, const std::filesystem::path& dir, const std::string& stem);

struct SweepSpec {
  std::string key;
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;

  std::vector<double> points() const;
};

// "key=lo:hi:steps"
SweepSpec parse_sweep(std::string_view text);

// "task:robot:gain" with robot a slave index, "M", or "all".
ChannelOverride parse_channel_override(std::string_view text);

struct SweepRow {
  double value = 0.0;
  EpisodeTrace trace;
};

// first_deactivation is ';'-joined per slave, "-" for robots that never retire.
inline constexpr std::string_view kSweepColumns =
    "point,value,policy,tasks_completed,termination_reason,sr_energy_total,system_energy_total,"
    "sr_energy_task1,first_deactivation";

void write_sweep_csv(const SweepSpec& sweep, const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace mrc
