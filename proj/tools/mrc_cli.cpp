// Command-line driver: run one or more policies over a scenario file and
// write per-task traces, or sweep one scenario field.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mrc/errors.hpp"
#include "mrc/scenario_io.hpp"
#include "mrc/sim.hpp"

namespace {

struct RunConfig {
  std::string scenario;
  std::string policy = "all";
  std::optional<int> tasks;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string sweep;
  std::vector<std::string> overrides;
};

std::vector<mrc::Policy> policies_for(const std::string& name) {
  if (name == "all") return {mrc::Policy::kOp, mrc::Policy::kRp, mrc::Policy::kGop};
  return {mrc::parse_policy(name)};
}

void print_summary(const mrc::EpisodeTrace& t) {
  std::printf("%-4s tasks=%d reason=%s", std::string(mrc::to_string(t.policy)).c_str(), t.tasks_completed,
              t.termination_reason.c_str());
  for (std::size_t k = 0; k < t.first_deactivation.size(); ++k) {
    if (t.first_deactivation[k]) std::printf(" SR%zu-off@%d", k + 1, *t.first_deactivation[k]);
  }
  std::printf("\n");
}

int run(const RunConfig& cfg) {
  mrc::Scenario sc = mrc::load_scenario(cfg.scenario);
  if (cfg.tasks) sc.tasks = *cfg.tasks;
  if (cfg.seed) sc.seed = *cfg.seed;
  for (const auto& o : cfg.overrides) sc.channel_schedule.push_back(mrc::parse_channel_override(o));
  sc.validate();

  const auto policies = policies_for(cfg.policy);
  const std::filesystem::path out(cfg.out);
  std::filesystem::create_directories(out);

  if (cfg.sweep.empty()) {
    std::vector<mrc::EpisodeJob> jobs;
    for (auto p : policies) jobs.push_back({sc, p});
    const auto traces = mrc::run_batch(jobs);
    for (const auto& t : traces) {
      mrc::emit_trace(t, out, std::string(mrc::to_string(t.policy)));
      print_summary(t);
    }
    return 0;
  }

  const auto sweep = mrc::parse_sweep(cfg.sweep);
  const auto points = sweep.points();
  std::vector<mrc::EpisodeJob> jobs;
  for (auto p : policies) {
    for (double v : points) {
      mrc::Scenario s = sc;
      mrc::set_scenario_value(s, sweep.key, v);
      jobs.push_back({s, p});
    }
  }
  const auto traces = mrc::run_batch(jobs);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    std::vector<mrc::SweepRow> rows;
    for (std::size_t j = 0; j < points.size(); ++j) rows.push_back({points[j], traces[i * points.size() + j]});
    const auto path = out / ("sweep_" + std::string(mrc::to_string(policies[i])) + ".csv");
    std::ofstream f(path);
    if (!f) throw mrc::ConfigError("cannot write " + path.string());
    mrc::write_sweep_csv(sweep, rows, f);
    std::printf("%s: %zu sweep points -> %s\n", std::string(mrc::to_string(policies[i])).c_str(),
                points.size(), path.string().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot sensing and offloading energy simulator"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto* cmd = app.add_subcommand("run", "Run episodes and write traces");
  cmd->add_option("--scenario", cfg.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--policy", cfg.policy, "op, rp, gop or all")
      ->check(CLI::IsMember({"op", "rp", "gop", "all"}));
  cmd->add_option("--tasks", cfg.tasks, "Task count (overrides the scenario)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", cfg.seed, "RNG seed (overrides the scenario)");
  cmd->add_option("--out", cfg.out, "Output directory");
  cmd->add_option("--sweep", cfg.sweep, "key=lo:hi:steps, e.g. T_s_cmp_ms=10:40:4");
  cmd->add_option("--channel-override", cfg.overrides, "task:robot:gain, robot is an index, M or all");

  CLI11_PARSE(app, argc, argv);
  try {
    return run(cfg);
  } catch (const mrc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
