#include "mrc/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "mrc/errors.hpp"

namespace mrc {

using nlohmann::json;

namespace {

// How a keyed number maps to SI.
enum class Conv { kScale, kDbm, kDb };

struct Unit {
  std::string_view suffix;  // empty: bare key
  Conv conv = Conv::kScale;
  double scale = 1.0;
};

struct Field {
  std::string_view base;
  std::vector<Unit> units;  // units[0] is the SI key written on save
};

std::string key_of(const Field& f, const Unit& u) {
  return u.suffix.empty() ? std::string(f.base) : std::string(f.base) + "_" + std::string(u.suffix);
}

std::string unit_list(const Field& f) {
  std::string out;
  for (std::size_t i = 0; i < f.units.size(); ++i) {
    if (i) out += i + 1 == f.units.size() ? " or " : ", ";
    out += key_of(f, f.units[i]);
  }
  return out;
}

double to_si(const Unit& u, double v) {
  switch (u.conv) {
    case Conv::kScale:
      return v * u.scale;
    case Conv::kDbm:
      return dbm_to_watts(v);
    case Conv::kDb:
      return std::pow(10.0, v / 10.0);
  }
  return v;
}

const Unit kWatt{"W"};
const Unit kJoule{"J"};

const Field kE_s{"e_s", {{"J_per_bit"}, {"nJ_per_bit", Conv::kScale, 1e-9}}};
const Field kP_s{"p_s", {kWatt, {"mW", Conv::kScale, 1e-3}}};
const Field kC{"C", {{"cycles_per_bit"}}};
const Field kU{"U", {{"cycles_per_s"}, {"Mcycles_per_s", Conv::kScale, 1e6}}};
const Field kP_cmp{"p_cmp", {{"J_per_cycle"}}};
const Field kP_c{"p_c", {kWatt, {"mW", Conv::kScale, 1e-3}}};
const Field kB{"B", {{"Hz"}, {"MHz", Conv::kScale, 1e6}}};
const Field kN{"N", {kWatt, {"dBm", Conv::kDbm}}};
const Field kH{"h", {{""}, {"dB", Conv::kDb}}};
const Field kDistance{"distance", {{"m"}}};
const Field kPathLoss{"path_loss_exponent", {{""}}};
const Field kE_init{"E_init", {kJoule}};
const Field kT_s{"T_s", {{"s"}, {"ms", Conv::kScale, 1e-3}}};
const Field kT_s_cmp{"T_s_cmp", {{"s"}, {"ms", Conv::kScale, 1e-3}}};
const Field kT_M_cmp{"T_M_cmp", {{"s"}, {"ms", Conv::kScale, 1e-3}}};
const Field kTaskBits{"task_bits", {{""}, {"Mbit", Conv::kScale, 1e6}}};
const Field kThreshold{"low_power_threshold", {kJoule}};

// Finds which unit variant of `f` (if any) the object uses; more than one is an error.
std::optional<std::pair<std::string, Unit>> find_key(const json& obj, const Field& f,
                                                     const std::string& where) {
  std::optional<std::pair<std::string, Unit>> hit;
  for (const auto& u : f.units) {
    const std::string k = key_of(f, u);
    if (!obj.contains(k)) continue;
    if (hit) throw ConfigError(where + std::string(f.base) + ": give only one of " + unit_list(f));
    hit = std::make_pair(k, u);
  }
  return hit;
}

double number(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError(name + ": expected a number");
  return v.get<double>();
}

ParamSpec read_spec(const json& v, const Unit& u, const std::string& name) {
  if (v.is_number()) return ParamSpec::fixed(to_si(u, v.get<double>()));
  if (v.is_array()) {
    if (v.size() != 2) throw ConfigError(name + ": a range is [lo, hi]");
    const double lo = number(v[0], name), hi = number(v[1], name);
    if (!(lo <= hi)) throw ConfigError(name + ": range needs lo <= hi");
    const bool db = u.conv != Conv::kScale;
    return ParamSpec::range(to_si(u, lo), to_si(u, hi), db);
  }
  if (v.is_object() && v.size() == 1 && v.contains("one_of")) {
    const json& list = v.at("one_of");
    if (!list.is_array() || list.empty()) throw ConfigError(name + ": one_of needs a non-empty list");
    std::vector<double> vals;
    for (const auto& x : list) vals.push_back(to_si(u, number(x, name)));
    return ParamSpec::one_of(std::move(vals));
  }
  if (v.is_object() && v.size() == 1 && v.contains("uniform_dB")) {
    if (u.conv != Conv::kScale) throw ConfigError(name + ": uniform_dB only applies to linear units");
    const json& r = v.at("uniform_dB");
    if (!r.is_array() || r.size() != 2) throw ConfigError(name + ": uniform_dB is [lo, hi]");
    const double lo = number(r[0], name), hi = number(r[1], name);
    if (!(lo > 0.0 && lo <= hi)) throw ConfigError(name + ": uniform_dB needs 0 < lo <= hi");
    return ParamSpec::range(to_si(u, lo), to_si(u, hi), true);
  }
  throw ConfigError(name + ": expected a number, [lo, hi], {\"one_of\": [...]} or {\"uniform_dB\": [lo, hi]}");
}

std::optional<ParamSpec> optional_spec(const json& obj, const Field& f, const std::string& where) {
  const auto hit = find_key(obj, f, where);
  if (!hit) return std::nullopt;
  return read_spec(obj.at(hit->first), hit->second, where + hit->first);
}

ParamSpec required_spec(const json& obj, const Field& f, const std::string& where) {
  auto s = optional_spec(obj, f, where);
  if (!s) throw ConfigError(where + std::string(f.base) + ": missing; give " + unit_list(f));
  return *s;
}

std::optional<double> optional_scalar(const json& obj, const Field& f, const std::string& where) {
  const auto hit = find_key(obj, f, where);
  if (!hit) return std::nullopt;
  return to_si(hit->second, number(obj.at(hit->first), where + hit->first));
}

double required_scalar(const json& obj, const Field& f, const std::string& where) {
  auto v = optional_scalar(obj, f, where);
  if (!v) throw ConfigError(where + std::string(f.base) + ": missing; give " + unit_list(f));
  return *v;
}

void reject_unknown(const json& obj, const std::vector<const Field*>& fields,
                    const std::set<std::string>& extra, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (extra.count(k)) continue;
    bool known = false;
    for (const Field* f : fields) {
      for (const auto& u : f->units) known = known || key_of(*f, u) == k;
    }
    if (!known) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

const std::vector<const Field*> kSlaveFields{&kE_s, &kP_s, &kC, &kU, &kP_cmp, &kP_c, &kB,
                                             &kN,   &kH,   &kDistance, &kPathLoss, &kE_init};
const std::vector<const Field*> kMasterFields{&kC, &kU, &kP_cmp, &kP_c, &kB, &kN, &kH, &kE_init};
const std::vector<const Field*> kTimeFields{&kT_s, &kT_s_cmp, &kT_M_cmp};
const std::vector<const Field*> kTopFields{&kTaskBits, &kThreshold};

SlaveSpec read_slave(const json& obj, const std::string& where) {
  reject_unknown(obj, kSlaveFields, {}, where);
  const std::string w = where + ".";
  SlaveSpec s;
  s.e_s = required_spec(obj, kE_s, w);
  s.p_s = required_spec(obj, kP_s, w);
  s.C = required_spec(obj, kC, w);
  s.U = required_spec(obj, kU, w);
  s.p_cmp = required_spec(obj, kP_cmp, w);
  s.p_c = optional_spec(obj, kP_c, w).value_or(ParamSpec::fixed(0.0));
  s.B = required_spec(obj, kB, w);
  s.N = required_spec(obj, kN, w);
  s.h = optional_spec(obj, kH, w);
  s.distance = optional_spec(obj, kDistance, w);
  if (s.h.has_value() == s.distance.has_value()) {
    throw ConfigError(w + "h: give exactly one of h, h_dB or distance_m");
  }
  if (auto a = optional_scalar(obj, kPathLoss, w)) {
    if (!s.distance) throw ConfigError(w + "path_loss_exponent: only meaningful with distance_m");
    s.path_loss_exponent = *a;
  }
  s.E_init = required_scalar(obj, kE_init, w);
  return s;
}

MasterSpec read_master(const json& obj) {
  reject_unknown(obj, kMasterFields, {}, "master");
  const std::string w = "master.";
  MasterSpec m;
  m.C_M = required_spec(obj, kC, w);
  m.U_M = required_spec(obj, kU, w);
  m.p_cmp_M = required_spec(obj, kP_cmp, w);
  m.p_c_M = optional_spec(obj, kP_c, w).value_or(ParamSpec::fixed(0.0));
  m.B_M = required_spec(obj, kB, w);
  m.N_1 = required_spec(obj, kN, w);
  m.h_M = required_spec(obj, kH, w);
  m.E_init_M = required_scalar(obj, kE_init, w);
  return m;
}

TimeBudget read_budget(const json& obj) {
  reject_unknown(obj, kTimeFields, {"local_window"}, "time_budget");
  const std::string w = "time_budget.";
  TimeBudget b;
  b.T_s = required_scalar(obj, kT_s, w);
  b.T_s_cmp = required_scalar(obj, kT_s_cmp, w);
  b.T_M_cmp = required_scalar(obj, kT_M_cmp, w);
  if (obj.contains("local_window")) {
    const json& v = obj.at("local_window");
    if (v == "cycle_count") {
      b.local_window = LocalWindow::kCycleCount;
    } else if (v == "bit_rate") {
      b.local_window = LocalWindow::kBitRate;
    } else {
      throw ConfigError("time_budget.local_window: expected \"cycle_count\" or \"bit_rate\"");
    }
  }
  return b;
}

int parse_robot(std::string_view r, const std::string& where) {
  if (r == "all") return ChannelOverride::kAllSlaves;
  if (r == "M" || r == "m") return ChannelOverride::kMasterRobot;
  int k = 0;
  const auto res = std::from_chars(r.data(), r.data() + r.size(), k);
  if (res.ec != std::errc() || res.ptr != r.data() + r.size() || k < 1) {
    throw ConfigError(where + ": robot must be a slave index (1-based), \"M\" or \"all\"");
  }
  return k;
}

std::string robot_name(int robot) {
  if (robot == ChannelOverride::kAllSlaves) return "all";
  if (robot == ChannelOverride::kMasterRobot) return "M";
  return std::to_string(robot);
}

ChannelOverride read_override(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (k != "task" && k != "robot" && k != "gain") throw ConfigError(where + ": unknown key '" + k + "'");
  }
  ChannelOverride o;
  if (!obj.contains("task") || !obj.at("task").is_number_integer()) {
    throw ConfigError(where + ".task: expected an integer task index");
  }
  o.task = obj.at("task").get<int>();
  const json& r = obj.contains("robot") ? obj.at("robot") : json("all");
  if (r.is_number_integer()) {
    o.robot = r.get<int>();
    if (o.robot < 1) throw ConfigError(where + ".robot: slave indices start at 1");
  } else if (r.is_string()) {
    o.robot = parse_robot(r.get<std::string>(), where + ".robot");
  } else {
    throw ConfigError(where + ".robot: expected an index, \"M\" or \"all\"");
  }
  if (!obj.contains("gain")) throw ConfigError(where + ".gain: missing linear channel gain");
  o.gain = number(obj.at("gain"), where + ".gain");
  return o;
}

json write_spec(const ParamSpec& s) {
  switch (s.kind) {
    case ParamSpec::Kind::kFixed:
      return s.lo;
    case ParamSpec::Kind::kRange:
      if (s.decibel) return json{{"uniform_dB", {s.lo, s.hi}}};
      return json::array({s.lo, s.hi});
    case ParamSpec::Kind::kChoice:
      return json{{"one_of", s.choices}};
  }
  return nullptr;
}

std::string si_key(const Field& f) { return key_of(f, f.units[0]); }

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Resolves a key to a field from `fields` and the unit it is written in.
std::optional<std::pair<const Field*, Unit>> resolve(std::string_view key,
                                                     const std::vector<const Field*>& fields) {
  for (const Field* f : fields) {
    for (const auto& u : f->units) {
      if (key_of(*f, u) == key) return std::make_pair(f, u);
    }
  }
  return std::nullopt;
}

void set_slave_value(SlaveSpec& s, const Field* f, double v) {
  const auto p = ParamSpec::fixed(v);
  if (f == &kE_s) s.e_s = p;
  else if (f == &kP_s) s.p_s = p;
  else if (f == &kC) s.C = p;
  else if (f == &kU) s.U = p;
  else if (f == &kP_cmp) s.p_cmp = p;
  else if (f == &kP_c) s.p_c = p;
  else if (f == &kB) s.B = p;
  else if (f == &kN) s.N = p;
  else if (f == &kH) {
    s.h = p;
    s.distance.reset();
  } else if (f == &kDistance) {
    s.distance = p;
    s.h.reset();
  } else if (f == &kPathLoss) s.path_loss_exponent = v;
  else if (f == &kE_init) s.E_init = v;
}

void set_master_value(MasterSpec& m, const Field* f, double v) {
  const auto p = ParamSpec::fixed(v);
  if (f == &kC) m.C_M = p;
  else if (f == &kU) m.U_M = p;
  else if (f == &kP_cmp) m.p_cmp_M = p;
  else if (f == &kP_c) m.p_c_M = p;
  else if (f == &kB) m.B_M = p;
  else if (f == &kN) m.N_1 = p;
  else if (f == &kH) m.h_M = p;
  else if (f == &kE_init) m.E_init_M = v;
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, kTopFields,
                 {"seed", "tasks", "time_budget", "slaves", "master", "on_master_exhausted",
                  "channel_schedule"},
                 "scenario");
  Scenario sc;
  if (!doc.contains("slaves") || !doc.at("slaves").is_array() || doc.at("slaves").empty()) {
    throw ConfigError("slaves: expected a non-empty array of slave robots");
  }
  for (std::size_t k = 0; k < doc.at("slaves").size(); ++k) {
    sc.slaves.push_back(read_slave(doc.at("slaves")[k], "slaves[" + std::to_string(k) + "]"));
  }
  if (!doc.contains("master")) throw ConfigError("master: missing");
  sc.master = read_master(doc.at("master"));
  if (!doc.contains("time_budget")) throw ConfigError("time_budget: missing");
  sc.budget = read_budget(doc.at("time_budget"));
  sc.task_bits = required_scalar(doc, kTaskBits, "");
  sc.low_power_threshold = required_scalar(doc, kThreshold, "");
  if (doc.contains("tasks")) {
    if (!doc.at("tasks").is_number_integer()) throw ConfigError("tasks: expected an integer");
    sc.tasks = doc.at("tasks").get<int>();
  }
  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
    sc.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("on_master_exhausted")) {
    const json& v = doc.at("on_master_exhausted");
    if (v == "end") {
      sc.on_master_exhausted = MasterExhaustion::kEndEpisode;
    } else if (v == "continue") {
      sc.on_master_exhausted = MasterExhaustion::kContinue;
    } else {
      throw ConfigError("on_master_exhausted: expected \"end\" or \"continue\"");
    }
  }
  if (doc.contains("channel_schedule")) {
    const json& list = doc.at("channel_schedule");
    if (!list.is_array()) throw ConfigError("channel_schedule: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      sc.channel_schedule.push_back(read_override(list[i], "channel_schedule[" + std::to_string(i) + "]"));
    }
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& sc) {
  json doc = json::object();
  if (sc.seed) doc["seed"] = *sc.seed;
  doc["tasks"] = sc.tasks;
  doc[si_key(kTaskBits)] = sc.task_bits;
  doc[si_key(kThreshold)] = sc.low_power_threshold;
  doc["time_budget"] = {
      {si_key(kT_s), sc.budget.T_s},
      {si_key(kT_s_cmp), sc.budget.T_s_cmp},
      {si_key(kT_M_cmp), sc.budget.T_M_cmp},
      {"local_window", sc.budget.local_window == LocalWindow::kBitRate ? "bit_rate" : "cycle_count"}};
  json slaves = json::array();
  for (const auto& s : sc.slaves) {
    json o;
    o[si_key(kE_s)] = write_spec(s.e_s);
    o[si_key(kP_s)] = write_spec(s.p_s);
    o[si_key(kC)] = write_spec(s.C);
    o[si_key(kU)] = write_spec(s.U);
    o[si_key(kP_cmp)] = write_spec(s.p_cmp);
    o[si_key(kP_c)] = write_spec(s.p_c);
    o[si_key(kB)] = write_spec(s.B);
    o[si_key(kN)] = write_spec(s.N);
    if (s.h) o[si_key(kH)] = write_spec(*s.h);
    if (s.distance) {
      o[si_key(kDistance)] = write_spec(*s.distance);
      o[si_key(kPathLoss)] = s.path_loss_exponent;
    }
    o[si_key(kE_init)] = s.E_init;
    slaves.push_back(o);
  }
  doc["slaves"] = slaves;
  const auto& m = sc.master;
  doc["master"] = {{si_key(kC), write_spec(m.C_M)},         {si_key(kU), write_spec(m.U_M)},
                   {si_key(kP_cmp), write_spec(m.p_cmp_M)}, {si_key(kP_c), write_spec(m.p_c_M)},
                   {si_key(kB), write_spec(m.B_M)},         {si_key(kN), write_spec(m.N_1)},
                   {si_key(kH), write_spec(m.h_M)},         {si_key(kE_init), m.E_init_M}};
  doc["on_master_exhausted"] = sc.on_master_exhausted == MasterExhaustion::kContinue ? "continue" : "end";
  json sched = json::array();
  for (const auto& o : sc.channel_schedule) {
    json r = o.robot > 0 ? json(o.robot) : json(robot_name(o.robot));
    sched.push_back({{"task", o.task}, {"robot", r}, {"gain", o.gain}});
  }
  doc["channel_schedule"] = sched;
  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write scenario file " + path.string());
  out << dump_scenario(scenario);
}

void set_scenario_value(Scenario& sc, std::string_view key, double value) {
  const std::string name(key);
  if (key.substr(0, 7) == "master.") {
    const auto hit = resolve(key.substr(7), kMasterFields);
    if (!hit) throw ConfigError("sweep key '" + name + "' does not name a master field");
    set_master_value(sc.master, hit->first, to_si(hit->second, value));
    return;
  }
  if (key.substr(0, 7) == "slaves.") {
    const auto rest = key.substr(7);
    const auto dot = rest.find('.');
    int k = 0;
    const auto res = std::from_chars(rest.data(), rest.data() + std::min(dot, rest.size()), k);
    const auto hit = dot == std::string_view::npos ? std::nullopt : resolve(rest.substr(dot + 1), kSlaveFields);
    if (res.ec != std::errc() || k < 1 || k > static_cast<int>(sc.slaves.size()) || !hit) {
      throw ConfigError("sweep key '" + name + "' does not name a slave field");
    }
    set_slave_value(sc.slaves[k - 1], hit->first, to_si(hit->second, value));
    return;
  }
  if (const auto hit = resolve(key, kTimeFields)) {
    const double v = to_si(hit->second, value);
    if (hit->first == &kT_s) sc.budget.T_s = v;
    if (hit->first == &kT_s_cmp) sc.budget.T_s_cmp = v;
    if (hit->first == &kT_M_cmp) sc.budget.T_M_cmp = v;
    return;
  }
  if (const auto hit = resolve(key, kTopFields)) {
    const double v = to_si(hit->second, value);
    if (hit->first == &kTaskBits) sc.task_bits = v;
    if (hit->first == &kThreshold) sc.low_power_threshold = v;
    return;
  }
  if (const auto hit = resolve(key, kSlaveFields)) {
    for (auto& s : sc.slaves) set_slave_value(s, hit->first, to_si(hit->second, value));
    return;
  }
  throw ConfigError("sweep key '" + name + "' does not name a scenario field");
}

void write_trace_csv(const EpisodeTrace& trace, std::ostream& out) {
  out << kTraceColumns << '\n';
  for (const auto& r : trace.rows) {
    const auto& e = r.energy;
    out << r.task << ',' << r.robot_id << ',' << (r.active ? 1 : 0) << ',' << fmt(r.t_s) << ','
        << fmt(r.D) << ',' << fmt(r.D_off) << ',' << fmt(r.t_off) << ',' << fmt(e.E_s) << ','
        << fmt(e.E_cmp) << ',' << fmt(e.E_tr) << ',' << fmt(e.E_circ) << ',' << fmt(e.E_tot) << ','
        << fmt(r.E_remaining) << ',' << csv_field(r.case_tag) << ','
        << (r.dual_gap ? fmt(*r.dual_gap) : "") << '\n';
  }
}

std::string summary_json(const EpisodeTrace& trace) {
  json doc;
  doc["policy"] = std::string(to_string(trace.policy));
  doc["tasks_completed"] = trace.tasks_completed;
  doc["termination_reason"] = trace.termination_reason;
  json totals = json::object();
  json first = json::object();
  const auto sr = trace.sr_energy_totals();
  for (std::size_t k = 0; k < sr.size(); ++k) {
    const std::string id = std::to_string(k + 1);
    totals[id] = sr[k];
    first[id] = trace.first_deactivation[k] ? json(*trace.first_deactivation[k]) : json(nullptr);
  }
  totals["M"] = trace.master_energy_total();
  first["M"] = trace.master_exhausted_task ? json(*trace.master_exhausted_task) : json(nullptr);
  doc["energy_totals_J"] = totals;
  doc["first_deactivation_task"] = first;
  doc["system_energy_per_task_J"] = trace.system_energy_per_task;
  doc["sr_energy_per_task_J"] = trace.sr_energy_per_task;
  json remaining = json::object();
  for (std::size_t k = 0; k < trace.final_state.reserves.size(); ++k) {
    remaining[std::to_string(k + 1)] = trace.final_state.reserves[k];
  }
  remaining["M"] = trace.final_state.master_reserve;
  doc["final_reserves_J"] = remaining;
  return doc.dump(2) + "\n";
}

void emit_trace(const EpisodeTrace& trace, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  const auto csv_path = dir / (stem + "_trace.csv");
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  write_trace_csv(trace, csv);
  const auto json_path = dir / (stem + "_summary.json");
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path.string());
  js << summary_json(trace);
}

std::vector<double> SweepSpec::points() const {
  std::vector<double> out;
  if (steps == 1) return {lo};
  for (int i = 0; i < steps; ++i) {
    out.push_back(i + 1 == steps ? hi : lo + (hi - lo) * i / (steps - 1));
  }
  return out;
}

namespace {

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(what + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("sweep: expected key=lo:hi:steps");
  const auto parts = split(text.substr(eq + 1), ':');
  if (parts.size() != 3) throw ConfigError("sweep: expected key=lo:hi:steps");
  SweepSpec s;
  s.key = std::string(text.substr(0, eq));
  s.lo = parse_double(parts[0], "sweep lo");
  s.hi = parse_double(parts[1], "sweep hi");
  s.steps = static_cast<int>(parse_double(parts[2], "sweep steps"));
  if (s.steps < 1 || s.steps != parse_double(parts[2], "sweep steps")) {
    throw ConfigError("sweep: steps must be a positive integer");
  }
  Scenario probe;
  probe.slaves.resize(1);
  set_scenario_value(probe, s.key, s.lo);
  return s;
}

ChannelOverride parse_channel_override(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("channel override: expected task:robot:gain");
  ChannelOverride o;
  o.task = static_cast<int>(parse_double(parts[0], "channel override task"));
  if (o.task < 1 || o.task != parse_double(parts[0], "channel override task")) {
    throw ConfigError("channel override: task must be a positive integer");
  }
  o.robot = parse_robot(parts[1], "channel override");
  o.gain = parse_double(parts[2], "channel override gain");
  return o;
}

void write_sweep_csv(const SweepSpec& sweep, const std::vector<SweepRow>& rows, std::ostream& out) {
  out << kSweepColumns << '\n';
  const auto pts = sweep.points();
  for (const auto& row : rows) {
    const auto& t = row.trace;
    const auto idx = std::find(pts.begin(), pts.end(), row.value) - pts.begin();
    double sr = 0.0, sys = 0.0;
    for (double e : t.sr_energy_per_task) sr += e;
    for (double e : t.system_energy_per_task) sys += e;
    std::string first;
    for (std::size_t k = 0; k < t.first_deactivation.size(); ++k) {
      if (k) first += ';';
      first += t.first_deactivation[k] ? std::to_string(*t.first_deactivation[k]) : "-";
    }
    out << idx << ',' << fmt(row.value) << ',' << to_string(t.policy) << ',' << t.tasks_completed << ','
        << csv_field(t.termination_reason) << ',' << fmt(sr) << ',' << fmt(sys) << ','
        << (t.sr_energy_per_task.empty() ? "" : fmt(t.sr_energy_per_task.front())) << ',' << first
        << '\n';
  }
}

}  // namespace mrc
