#include "swarmsense/harness.hpp"

#include "swarmsense/coordination.hpp"
#include "swarmsense/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace swarmsense {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "1.0.0";
constexpr double kAuditTolerance = 1e-6;

// Seed-path roots; each stream is derive_seed(master, {root, ...}).
constexpr std::uint64_t kMapStream = 0;
constexpr std::uint64_t kPlanStream = 1;
constexpr std::uint64_t kTreeStream = 2;
constexpr std::uint64_t kTrafficStream = 3;

// ---------------------------------------------------------------- names

std::string kind_name(MethodKind kind)
{
  switch (kind) {
    case MethodKind::epos:
      return "epos";
    case MethodKind::greedy:
      return "greedy";
    case MethodKind::round_robin:
      return "round_robin";
    case MethodKind::min_energy:
      break;
  }
  return "min_energy";
}

MethodKind kind_from(const std::string& name, const std::string& field)
{
  if (name == "epos")
    return MethodKind::epos;
  if (name == "greedy")
    return MethodKind::greedy;
  if (name == "round_robin")
    return MethodKind::round_robin;
  if (name == "min_energy")
    return MethodKind::min_energy;
  throw ConfigError(field, "unknown method kind '" + name + "'");
}

std::string allocation_name(Allocation a)
{
  return a == Allocation::mean ? "mean" : "proportional";
}

Allocation allocation_from(const std::string& name, const std::string& field)
{
  if (name == "proportional")
    return Allocation::proportional;
  if (name == "mean")
    return Allocation::mean;
  throw ConfigError(field, "unknown allocation '" + name + "'");
}

std::string view_name(GreedyView v)
{
  return v == GreedyView::local ? "local" : "global";
}

GreedyView view_from(const std::string& name, const std::string& field)
{
  if (name == "global")
    return GreedyView::global;
  if (name == "local")
    return GreedyView::local;
  throw ConfigError(field, "unknown greedy view '" + name + "'");
}

std::string scenario_kind_name(ScenarioKind k)
{
  return k == ScenarioKind::traffic ? "traffic" : "synthetic";
}

ScenarioKind scenario_kind_from(const std::string& name,
                                const std::string& field)
{
  if (name == "synthetic")
    return ScenarioKind::synthetic;
  if (name == "traffic")
    return ScenarioKind::traffic;
  throw ConfigError(field, "unknown scenario kind '" + name + "'");
}

// ---------------------------------------------------------------- methods

MethodConfig epos_method(std::string name, MobilityPolicy policy, double beta)
{
  MethodConfig m;
  m.name = std::move(name);
  m.kind = MethodKind::epos;
  m.policy = policy;
  m.beta = beta;
  return m;
}

MethodConfig greedy_method(std::string name, GreedyView view)
{
  MethodConfig m;
  m.name = std::move(name);
  m.kind = MethodKind::greedy;
  m.view = view;
  return m;
}

std::vector<MethodConfig> default_methods()
{
  MethodConfig rr;
  rr.name = "Round-robin";
  rr.kind = MethodKind::round_robin;
  MethodConfig me;
  me.name = "Min-energy";
  me.kind = MethodKind::min_energy;
  return {epos_method("EPOS-balance", MobilityPolicy::balance, 0.0),
          epos_method("EPOS-mismatch", MobilityPolicy::mismatch, 0.0),
          epos_method("EPOS-inefficiency", MobilityPolicy::inefficiency, 0.0),
          epos_method("EPOS-Pareto", MobilityPolicy::balance, 0.2),
          greedy_method("Greedy-sensing", GreedyView::global),
          greedy_method("Greedy-sensing-local", GreedyView::local),
          rr,
          me};
}

bool uses_plans(const MethodConfig& m)
{
  return m.kind == MethodKind::epos || m.kind == MethodKind::min_energy;
}

// ---------------------------------------------------------------- json

json method_json(const MethodConfig& m)
{
  return {{"name", m.name},
          {"kind", kind_name(m.kind)},
          {"beta", m.beta},
          {"policy", std::string(to_string(m.policy))},
          {"allocation", allocation_name(m.allocation)},
          {"plans", m.plan_count},
          {"delta", m.delta},
          {"iterations", m.iterations},
          {"repetitions", m.repetitions},
          {"cells_per_dispatch", m.cells_per_dispatch},
          {"view", view_name(m.view)}};
}

json time_json(const TimeStructure& t)
{
  return {{"periods", t.periods},
          {"units_per_period", t.units_per_period},
          {"unit_length_s", t.unit_length_s}};
}

/// Overlays `patch` on `base` in place; every key must already exist.
void overlay(json& base, const json& patch, const std::string& path)
{
  if (!patch.is_object())
    throw ConfigError(path.empty() ? "/" : path, "expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string field = path + "/" + key;
    if (!base.contains(key))
      throw ConfigError(field, "unknown key");
    json& target = base[key];
    if (key == "methods" && path.empty()) {
      if (!value.is_array())
        throw ConfigError(field, "expected an array");
      json methods = json::array();
      for (std::size_t i = 0; i < value.size(); ++i) {
        json m = method_json(MethodConfig{});
        overlay(m, value[i], field + "/" + std::to_string(i));
        methods.push_back(std::move(m));
      }
      target = std::move(methods);
    } else if (key == "sweep" && path.empty()) {
      json s = {{"axis", ""}, {"values", json::array()}};
      if (target.is_object())
        s = target;
      if (!value.is_null())
        overlay(s, value, field);
      target = value.is_null() ? json(nullptr) : s;
    } else if (target.is_object()) {
      overlay(target, value, field);
    } else {
      target = value;
    }
  }
}

template <typename T>
T read(const json& j, const std::string& key, const std::string& path)
{
  const std::string field = path + "/" + key;
  if (!j.contains(key))
    throw ConfigError(field, "missing");
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean())
      throw ConfigError(field, "expected a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string())
      throw ConfigError(field, "expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer())
      throw ConfigError(field, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw ConfigError(field, "expected a non-negative integer");
    }
  } else {
    if (!v.is_number())
      throw ConfigError(field, "expected a number");
  }
  return v.get<T>();
}

MethodConfig method_from(const json& j, const std::string& path)
{
  MethodConfig m;
  m.name = read<std::string>(j, "name", path);
  m.kind = kind_from(read<std::string>(j, "kind", path), path + "/kind");
  m.beta = read<double>(j, "beta", path);
  try {
    m.policy = policy_from_string(read<std::string>(j, "policy", path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + "/policy", e.what());
  }
  m.allocation = allocation_from(read<std::string>(j, "allocation", path),
                                 path + "/allocation");
  m.plan_count = read<int>(j, "plans", path);
  m.delta = read<double>(j, "delta", path);
  m.iterations = read<int>(j, "iterations", path);
  m.repetitions = read<int>(j, "repetitions", path);
  m.cells_per_dispatch = read<int>(j, "cells_per_dispatch", path);
  m.view = view_from(read<std::string>(j, "view", path), path + "/view");
  return m;
}

ExperimentConfig config_from(const json& j)
{
  ExperimentConfig c;
  c.preset = read<std::string>(j, "preset", "");
  c.seed = read<std::uint64_t>(j, "seed", "");
  c.output = read<std::string>(j, "output", "");
  c.stability_maps = read<int>(j, "stability_maps", "");
  c.workers = read<int>(j, "workers", "");

  const json& s = j.at("scenario");
  const std::string sp = "/scenario";
  auto& sc = c.scenario;
  sc.name = read<std::string>(s, "name", sp);
  sc.kind = scenario_kind_from(read<std::string>(s, "kind", sp), sp + "/kind");
  sc.map_file = read<std::string>(s, "map_file", sp);
  sc.maps = read<int>(s, "maps", sp);
  sc.dispatches = read<int>(s, "dispatches", sp);
  sc.horizon_units = read<int>(s, "horizon_units", sp);
  sc.per_period_ledger = read<bool>(s, "per_period_ledger", sp);
  sc.coordination_target = read<std::string>(s, "coordination_target", sp);

  const json& m = s.at("map");
  const std::string mp = sp + "/map";
  sc.map.cells = read<int>(m, "cells", mp);
  sc.map.stations = read<int>(m, "stations", mp);
  sc.map.total_target = read<double>(m, "total_target", mp);
  sc.map.beta_a = read<double>(m, "beta_a", mp);
  sc.map.beta_b = read<double>(m, "beta_b", mp);
  sc.map.side_length = read<double>(m, "side_length", mp);
  const json& t = s.at("time");
  const std::string tp = sp + "/time";
  sc.map.time.periods = read<int>(t, "periods", tp);
  sc.map.time.units_per_period = read<int>(t, "units_per_period", tp);
  sc.map.time.unit_length_s = read<double>(t, "unit_length_s", tp);

  const json& tr = s.at("traffic");
  const std::string trp = sp + "/traffic";
  sc.traffic_file = read<std::string>(tr, "file", trp);
  sc.traffic.cells = read<int>(tr, "cells", trp);
  sc.traffic.mean_rate = read<double>(tr, "mean_rate", trp);
  sc.traffic.cell_shape = read<double>(tr, "cell_shape", trp);
  const json& types = tr.at("vehicle_types");
  if (!types.is_array())
    throw ConfigError(trp + "/vehicle_types", "expected an array");
  sc.traffic.vehicle_types.clear();
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (!types[i].is_string())
      throw ConfigError(trp + "/vehicle_types/" + std::to_string(i),
                        "expected a string");
    sc.traffic.vehicle_types.push_back(types[i].get<std::string>());
  }
  sc.traffic_cap = read<double>(tr, "cap", trp);
  sc.traffic_columns = read<int>(tr, "columns", trp);
  sc.traffic_pitch = read<double>(tr, "pitch", trp);

  const json& d = j.at("drone");
  const std::string dp = "/drone";
  c.drone.body_mass = read<double>(d, "body_mass", dp);
  c.drone.battery_mass = read<double>(d, "battery_mass", dp);
  c.drone.propeller_diameter = read<double>(d, "propeller_diameter", dp);
  c.drone.propeller_count = read<int>(d, "propeller_count", dp);
  c.drone.ground_speed = read<double>(d, "ground_speed", dp);
  c.drone.drag_force = read<double>(d, "drag_force", dp);
  c.drone.power_efficiency = read<double>(d, "power_efficiency", dp);
  c.drone.battery_capacity = read<double>(d, "battery_capacity", dp);
  c.drone.sensing_frequency = read<double>(d, "sensing_frequency", dp);

  const json& e = j.at("environment");
  c.environment.air_density = read<double>(e, "air_density", "/environment");
  c.environment.gravity = read<double>(e, "gravity", "/environment");

  const json& methods = j.at("methods");
  for (std::size_t i = 0; i < methods.size(); ++i)
    c.methods.push_back(method_from(methods[i], "/methods/" + std::to_string(i)));

  const json& sweep = j.at("sweep");
  if (!sweep.is_null()) {
    SweepConfig sw;
    sw.axis = read<std::string>(sweep, "axis", "/sweep");
    const json& values = sweep.at("values");
    if (!values.is_array())
      throw ConfigError("/sweep/values", "expected an array");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!values[i].is_number())
        throw ConfigError("/sweep/values/" + std::to_string(i),
                          "expected a number");
      sw.values.push_back(values[i].get<double>());
    }
    c.sweep = std::move(sw);
  }
  return c;
}

// ---------------------------------------------------------------- output

std::string opt_number(const std::optional<double>& v)
{
  return v ? format_number(*v) : std::string();
}

std::string sweep_label(const std::string& axis, double value)
{
  return axis + "=" + format_number(value);
}

std::string hex(std::uint64_t v)
{
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

void write_json(const std::filesystem::path& path, const json& j)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::string> assumptions(const ExperimentConfig& config)
{
  const auto& sc = config.scenario;
  const int periods = sc.map.time.periods;
  const int per_period = dispatches_per_period(sc.dispatches, periods);
  return {
    "dispatches per period: ceil(" + std::to_string(sc.dispatches) + "/" +
      std::to_string(periods) + ") = " + std::to_string(per_period) +
      ", assigned uniformly in dispatch order",
    "dispatch u departs from station u mod stations",
    "one sensing value costs 1/f seconds of hover",
    "combined cost: per-map min-max normalization across the listed methods",
    "unit-scaled RSS: L2 normalization of aggregate and target",
    "occupancy conflicts are reported, not optimized",
    "mission inefficiency is reported uncapped; negative means over-collection",
  };
}

class Manifest
{
public:
  Manifest(const ExperimentConfig& config, std::string command,
           std::filesystem::path directory)
    : directory_(std::move(directory))
  {
    body_ = {{"tool", "swarmsense"},
             {"version", kVersion},
             {"command", std::move(command)},
             {"config_hash", hex(config_hash(config))},
             {"config", to_json(config)},
             {"seeds", {{"master", config.seed}}},
             {"assumptions", assumptions(config)},
             {"outputs", json::array()},
             {"status", "running"}};
  }

  void add_output(const std::string& name) { body_["outputs"].push_back(name); }
  void set_map_seeds(const json& seeds) { body_["seeds"]["maps"] = seeds; }
  void write() const { write_json(directory_ / "manifest.json", body_); }

  // Only the status fields change after the first write.
  void finish(bool complete, const std::vector<std::string>& errors)
  {
    body_["status"] = complete ? "complete" : "incomplete";
    if (!errors.empty())
      body_["errors"] = errors;
    write();
  }

private:
  std::filesystem::path directory_;
  json body_;
};

// ---------------------------------------------------------------- workers

/// Runs `job(i)` for i in [0, count) over `workers` threads. Failures are
/// collected per index; results stay in index order.
template <typename Result, typename Job>
void fan_out(int count, int workers, Job job,
             std::vector<std::optional<Result>>& results,
             std::vector<std::string>& errors)
{
  results.assign(count, std::nullopt);
  std::vector<std::string> failure(count);
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        results[i] = job(i);
      } catch (const std::exception& e) {
        failure[i] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min(workers, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto& thread : pool)
      thread.join();
  }
  for (int i = 0; i < count; ++i)
    if (!failure[i].empty())
      errors.push_back("job " + std::to_string(i) + ": " + failure[i]);
}

struct Job
{
  ExperimentConfig config;
  std::string label;
  int map = 0;
};

std::vector<Job> expand_jobs(const ExperimentConfig& config)
{
  std::vector<Job> jobs;
  if (config.sweep) {
    for (const double value : config.sweep->values) {
      auto swept = apply_sweep(config, config.sweep->axis, value);
      for (int m = 0; m < swept.scenario.maps; ++m)
        jobs.push_back({swept, sweep_label(config.sweep->axis, value), m});
    }
  } else {
    for (int m = 0; m < config.scenario.maps; ++m)
      jobs.push_back({config, "", m});
  }
  return jobs;
}

std::filesystem::path prepare_directory(const ExperimentConfig& config)
{
  const std::filesystem::path dir(config.output);
  std::filesystem::create_directories(dir);
  return dir;
}

double relative_gap(double a, double b)
{
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

/// Copies of the agents whose plan vectors are their occupancy on the
/// absolute (unit, cell) grid, unit-major.
std::vector<AgentState> occupancy_view(std::span<const AgentState> agents,
                                       std::span<const Dispatch> dispatches,
                                       int cells, int time_units)
{
  std::vector<AgentState> out;
  out.reserve(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    std::vector<Plan> plans;
    plans.reserve(agents[a].plans.size());
    for (const auto& original : agents[a].plans) {
      Plan plan;
      plan.index = original.index;
      plan.cost = original.cost;
      const auto occupied = original.occupancy.cells();
      for (std::size_t m = 0; m < occupied.size(); ++m) {
        const int unit = dispatches[a].start_unit + static_cast<int>(m);
        if (occupied[m] >= 0 && unit < time_units)
          plan.sensing.push_back({unit * cells + occupied[m], 1.0});
      }
      plans.push_back(std::move(plan));
    }
    out.emplace_back(agents[a].id, std::move(plans));
  }
  return out;
}

CoordinationResult coordinate(const ExperimentConfig& config,
                              const ScenarioInstance& instance,
                              std::span<const AgentState> agents,
                              const MethodConfig& method, int map,
                              std::uint64_t method_index)
{
  const auto seed = derive_seed(
    config.seed, {kTreeStream, std::uint64_t(map), method_index});
  if (instance.vehicle_targets.empty())
    return run_coordination(agents, instance.map.targets(), method.beta,
                            method.iterations, method.repetitions, seed);
  const auto dispatches =
    schedule_dispatches(instance.map, config.scenario.dispatches);
  const auto view = occupancy_view(agents, dispatches,
                                   static_cast<int>(instance.map.size()),
                                   instance.map.time.total_units());
  return run_coordination(view, instance.vehicle_targets, method.beta,
                          method.iterations, method.repetitions, seed);
}

using PlanKey = std::tuple<int, int, int, double>;

PlanKey plan_key(const MethodConfig& m)
{
  return {static_cast<int>(m.policy), static_cast<int>(m.allocation),
          m.plan_count, m.delta};
}

std::string plan_file_name(int map, const MethodConfig& m)
{
  std::ostringstream name;
  name << "map" << std::setw(4) << std::setfill('0') << map << '_'
       << to_string(m.policy) << '_' << allocation_name(m.allocation) << "_p"
       << m.plan_count << "_d" << format_number(m.delta) << ".csv";
  return name.str();
}

} // namespace

// ---------------------------------------------------------------- config

const std::vector<std::string>& sweep_axes()
{
  static const std::vector<std::string> axes = {"dispatches", "total_target",
                                                "cells", "stations"};
  return axes;
}

std::vector<double> default_sweep_values(const std::string& axis)
{
  if (axis == "dispatches")
    return {200, 400, 600, 800, 1000};
  if (axis == "total_target")
    return {10000, 20000};
  if (axis == "cells")
    return {16, 64, 144};
  if (axis == "stations")
    return {1, 2, 4, 9};
  throw ConfigError("/sweep/axis", "unknown sweep axis '" + axis + "'");
}

ExperimentConfig preset_config(const std::string& name)
{
  ExperimentConfig c;
  c.preset = name;
  c.methods = default_methods();
  if (name == "basic")
    return c;
  if (name == "desk") {
    c.scenario.name = "desk";
    c.scenario.map.cells = 16;
    c.scenario.map.stations = 2;
    c.scenario.maps = 20;
    c.scenario.dispatches = 200;
    c.stability_maps = 50;
    return c;
  }
  if (name == "traffic") {
    c.scenario.name = "traffic";
    c.scenario.kind = ScenarioKind::traffic;
    c.scenario.maps = 20;
    c.scenario.dispatches = 100;
    c.scenario.horizon_units = 30;
    c.scenario.per_period_ledger = true;
    c.scenario.coordination_target = "occupancy";
    c.scenario.map.time = {20, 30, 60.0};
    c.scenario.traffic.cells = 10;
    c.scenario.traffic_columns = 5;
    c.scenario.traffic_pitch = 200.0;
    c.scenario.traffic_cap = 500.0;
    // One full battery fits a single 30-minute period.
    c.drone.battery_capacity = 110000.0;
    c.methods = {epos_method("EPOS-balance", MobilityPolicy::balance, 0.0),
                 greedy_method("Greedy-sensing", GreedyView::global)};
    return c;
  }
  throw ConfigError("/preset", "unknown preset '" + name + "'");
}

nlohmann::json to_json(const ExperimentConfig& c)
{
  const auto& sc = c.scenario;
  json methods = json::array();
  for (const auto& m : c.methods)
    methods.push_back(method_json(m));
  json sweep = nullptr;
  if (c.sweep)
    sweep = {{"axis", c.sweep->axis}, {"values", c.sweep->values}};
  return {
    {"preset", c.preset},
    {"seed", c.seed},
    {"output", c.output},
    {"stability_maps", c.stability_maps},
    {"workers", c.workers},
    {"scenario",
     {{"name", sc.name},
      {"kind", scenario_kind_name(sc.kind)},
      {"map_file", sc.map_file},
      {"maps", sc.maps},
      {"dispatches", sc.dispatches},
      {"horizon_units", sc.horizon_units},
      {"per_period_ledger", sc.per_period_ledger},
      {"coordination_target", sc.coordination_target},
      {"map",
       {{"cells", sc.map.cells},
        {"stations", sc.map.stations},
        {"total_target", sc.map.total_target},
        {"beta_a", sc.map.beta_a},
        {"beta_b", sc.map.beta_b},
        {"side_length", sc.map.side_length}}},
      {"time", time_json(sc.map.time)},
      {"traffic",
       {{"file", sc.traffic_file},
        {"cells", sc.traffic.cells},
        {"vehicle_types", sc.traffic.vehicle_types},
        {"mean_rate", sc.traffic.mean_rate},
        {"cell_shape", sc.traffic.cell_shape},
        {"cap", sc.traffic_cap},
        {"columns", sc.traffic_columns},
        {"pitch", sc.traffic_pitch}}}}},
    {"drone",
     {{"body_mass", c.drone.body_mass},
      {"battery_mass", c.drone.battery_mass},
      {"propeller_diameter", c.drone.propeller_diameter},
      {"propeller_count", c.drone.propeller_count},
      {"ground_speed", c.drone.ground_speed},
      {"drag_force", c.drone.drag_force},
      {"power_efficiency", c.drone.power_efficiency},
      {"battery_capacity", c.drone.battery_capacity},
      {"sensing_frequency", c.drone.sensing_frequency}}},
    {"environment",
     {{"air_density", c.environment.air_density},
      {"gravity", c.environment.gravity}}},
    {"methods", methods},
    {"sweep", sweep},
  };
}

ExperimentConfig merge_config(const ExperimentConfig& base,
                              const nlohmann::json& overrides)
{
  json tree = to_json(base);
  if (overrides.contains("preset") && overrides["preset"].is_string())
    tree = to_json(preset_config(overrides["preset"].get<std::string>()));
  overlay(tree, overrides, "");
  auto config = config_from(tree);
  validate(config);
  return config;
}

void validate(const ExperimentConfig& c)
{
  const auto& sc = c.scenario;
  const auto require = [](bool ok, const std::string& field,
                           const std::string& what) {
    if (!ok)
      throw ConfigError(field, what);
  };
  require(sc.maps >= 1, "/scenario/maps", "must be at least 1");
  require(sc.dispatches >= 1, "/scenario/dispatches", "must be at least 1");
  require(sc.horizon_units >= 0, "/scenario/horizon_units",
           "must be non-negative");
  require(sc.map.time.periods >= 1, "/scenario/time/periods",
           "must be at least 1");
  require(sc.map.time.units_per_period >= 1,
           "/scenario/time/units_per_period", "must be at least 1");
  require(sc.map.time.unit_length_s > 0.0, "/scenario/time/unit_length_s",
           "must be positive");
  require(c.stability_maps >= 1, "/stability_maps", "must be at least 1");
  require(c.workers >= 1, "/workers", "must be at least 1");

  int cells = 0;
  if (sc.kind == ScenarioKind::synthetic) {
    const int side = static_cast<int>(std::lround(std::sqrt(sc.map.cells)));
    require(sc.map.cells >= 1 && side * side == sc.map.cells,
             "/scenario/map/cells", "must be a positive perfect square");
    require(sc.map.stations >= 1 && sc.map.stations <= sc.map.cells,
             "/scenario/map/stations", "must lie in 1..cells");
    require(sc.map.total_target > 0.0, "/scenario/map/total_target",
             "must be positive");
    require(sc.map.beta_a > 0.0, "/scenario/map/beta_a", "must be positive");
    require(sc.map.beta_b > 0.0, "/scenario/map/beta_b", "must be positive");
    require(sc.map.side_length > 0.0, "/scenario/map/side_length",
             "must be positive");
    cells = sc.map.cells;
    require(sc.coordination_target == "sensing",
            "/scenario/coordination_target",
            "occupancy targets need a traffic scenario");
  } else {
    require(sc.traffic.cells >= 2, "/scenario/traffic/cells",
             "must be at least 2");
    require(!sc.traffic.vehicle_types.empty(),
             "/scenario/traffic/vehicle_types", "must not be empty");
    require(sc.traffic.mean_rate > 0.0, "/scenario/traffic/mean_rate",
             "must be positive");
    require(sc.traffic.cell_shape > 0.0, "/scenario/traffic/cell_shape",
             "must be positive");
    require(sc.traffic_cap > 0.0, "/scenario/traffic/cap", "must be positive");
    require(sc.coordination_target == "sensing" ||
              sc.coordination_target == "occupancy",
            "/scenario/coordination_target", "must be sensing or occupancy");
    require(sc.traffic_columns >= 1, "/scenario/traffic/columns",
             "must be at least 1");
    require(sc.traffic_pitch > 0.0, "/scenario/traffic/pitch",
             "must be positive");
    cells = sc.traffic.cells;
  }

  try {
    c.drone.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/drone", e.what());
  }
  require(c.environment.air_density > 0.0, "/environment/air_density",
           "must be positive");
  require(c.environment.gravity > 0.0, "/environment/gravity",
           "must be positive");

  require(!c.methods.empty(), "/methods", "must not be empty");
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const auto& m = c.methods[i];
    const std::string p = "/methods/" + std::to_string(i);
    require(!m.name.empty(), p + "/name", "must not be empty");
    for (std::size_t j = 0; j < i; ++j)
      require(c.methods[j].name != m.name, p + "/name",
               "duplicates method '" + m.name + "'");
    require(m.beta >= 0.0 && m.beta <= 1.0, p + "/beta", "must lie in [0, 1]");
    require(m.plan_count >= 1, p + "/plans", "must be at least 1");
    require(m.delta >= 1.0, p + "/delta", "must be at least 1");
    require(m.iterations >= 1, p + "/iterations", "must be at least 1");
    require(m.repetitions >= 1, p + "/repetitions", "must be at least 1");
    require(m.cells_per_dispatch >= 1 && m.cells_per_dispatch <= cells,
             p + "/cells_per_dispatch", "must lie in 1..cells");
  }

  if (c.sweep) {
    const auto& axes = sweep_axes();
    require(std::find(axes.begin(), axes.end(), c.sweep->axis) != axes.end(),
             "/sweep/axis", "unknown sweep axis '" + c.sweep->axis + "'");
    require(!c.sweep->values.empty(), "/sweep/values", "must not be empty");
    require(sc.kind == ScenarioKind::synthetic, "/sweep",
             "sweeps apply to synthetic scenarios");
    for (const double v : c.sweep->values)
      validate(apply_sweep(
        [&] {
          auto copy = c;
          copy.sweep.reset();
          return copy;
        }(),
        c.sweep->axis, v));
  }
}

std::uint64_t config_hash(const ExperimentConfig& config)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig apply_sweep(ExperimentConfig config, const std::string& axis,
                             double value)
{
  auto& map = config.scenario.map;
  const auto integer = [&](const std::string& field) {
    if (value != std::floor(value))
      throw ConfigError("/sweep/values", field + " needs integer values");
    return static_cast<int>(value);
  };
  if (axis == "dispatches")
    config.scenario.dispatches = integer(axis);
  else if (axis == "total_target")
    map.total_target = value;
  else if (axis == "cells")
    map.cells = integer(axis);
  else if (axis == "stations")
    map.stations = integer(axis);
  else
    throw ConfigError("/sweep/axis", "unknown sweep axis '" + axis + "'");
  return config;
}

// ---------------------------------------------------------------- records

void write_metric_header(std::ostream& out)
{
  out << "scenario,map,map_seed,sweep,method,dispatches,total_energy_kj,"
         "sensing_mismatch,unit_rss,mission_inefficiency,over_collected,"
         "combined_cost,occupancy_conflicts,traffic_accuracy,"
         "traffic_efficiency\n";
}

void write_metric_record(std::ostream& out, const MetricRecord& r)
{
  out << r.scenario << ',' << r.map << ',' << r.map_seed << ',' << r.sweep
      << ',' << r.method << ',' << r.dispatches << ','
      << format_number(r.total_energy_kj) << ','
      << format_number(r.sensing_mismatch) << ',' << format_number(r.unit_rss)
      << ',' << format_number(r.mission_inefficiency) << ','
      << (r.over_collected ? 1 : 0) << ',' << format_number(r.combined_cost)
      << ',' << r.occupancy_conflicts << ',' << opt_number(r.traffic_accuracy)
      << ',' << opt_number(r.traffic_efficiency) << '\n';
}

// ---------------------------------------------------------------- running

ScenarioInstance build_instance(const ExperimentConfig& config, int map)
{
  const auto& sc = config.scenario;
  ScenarioInstance instance;
  instance.map_seed = derive_seed(config.seed, {kMapStream, std::uint64_t(map)});

  if (sc.kind == ScenarioKind::synthetic) {
    if (!sc.map_file.empty()) {
      std::ifstream in(sc.map_file);
      if (!in)
        throw ConfigError("/scenario/map_file", "cannot open " + sc.map_file);
      instance.map = map_from_json(json::parse(in));
    } else {
      instance.map = generate_synthetic_map(sc.map, instance.map_seed);
    }
    return instance;
  }

  const auto& time = sc.map.time;
  const int cells = sc.traffic.cells;
  if (!sc.traffic_file.empty()) {
    std::ifstream in(sc.traffic_file);
    if (!in)
      throw ConfigError("/scenario/traffic/file", "cannot open " +
                                                    sc.traffic_file);
    instance.traffic = load_traffic_scenario(in, cells, time.total_units());
  } else {
    auto params = sc.traffic;
    params.time_units = time.total_units();
    params.units_per_period = time.units_per_period;
    instance.traffic = generate_synthetic_traffic(
      params, derive_seed(config.seed, {kTrafficStream, std::uint64_t(map)}));
  }

  const int columns = std::min(sc.traffic_columns, cells);
  const int rows = (cells + columns - 1) / columns;
  const double pitch = sc.traffic_pitch;
  std::vector<Point> centers;
  for (int n = 0; n < cells; ++n)
    centers.push_back({(n % columns + 0.5) * pitch, (n / columns + 0.5) * pitch});
  const double mid = rows * pitch / 2.0;
  const std::vector<Point> stations = {{0.0, mid}, {columns * pitch, mid}};
  const auto targets = traffic_targets(*instance.traffic, sc.traffic_cap);
  instance.period_targets = traffic_period_targets(
    *instance.traffic, sc.traffic_cap, time.units_per_period);
  if (sc.coordination_target == "occupancy") {
    const auto& t = *instance.traffic;
    instance.vehicle_targets.assign(
      static_cast<std::size_t>(t.time_units()) * cells, 0.0);
    for (int type = 0; type < static_cast<int>(t.vehicle_types().size()); ++type)
      for (int n = 0; n < cells; ++n)
        for (int m = 0; m < t.time_units(); ++m)
          instance.vehicle_targets[static_cast<std::size_t>(m) * cells + n] +=
            static_cast<double>(t.count(type, n, m));
  }
  instance.map = make_map(std::max(columns, rows) * pitch, centers, targets,
                          stations, time);
  return instance;
}

std::vector<AgentState> build_agents(const ExperimentConfig& config,
                                     const ScenarioInstance& instance,
                                     const MethodConfig& method, int map)
{
  const auto power = power_profile(config.drone, config.environment);
  const auto dispatches =
    schedule_dispatches(instance.map, config.scenario.dispatches);
  PlanGenerationOptions options;
  options.plan_count = method.plan_count;
  options.delta = method.delta;
  options.policy = method.policy;
  options.allocation = method.allocation;
  options.horizon_units = config.scenario.horizon_units;

  std::vector<AgentState> agents;
  agents.reserve(dispatches.size());
  for (const auto& d : dispatches) {
    const auto seed = derive_seed(
      config.seed, {kPlanStream, std::uint64_t(map), std::uint64_t(d.index),
                    std::uint64_t(method.policy), std::uint64_t(method.allocation)});
    agents.emplace_back(d.index,
                        generate_plans(config.drone, power, instance.map,
                                       instance.map.stations[d.station],
                                       options, seed));
  }
  return agents;
}

MapOutcome evaluate_map(const ExperimentConfig& config, int map,
                        const std::string& label)
{
  const auto instance = build_instance(config, map);
  const auto& sensing_map = instance.map;
  const auto targets = sensing_map.targets();
  const auto power = power_profile(config.drone, config.environment);
  const auto dispatches =
    schedule_dispatches(sensing_map, config.scenario.dispatches);
  const int horizon = config.scenario.horizon_units;

  std::map<PlanKey, std::vector<AgentState>> plan_sets;
  const auto agents_for = [&](const MethodConfig& m) -> const auto& {
    auto it = plan_sets.find(plan_key(m));
    if (it == plan_sets.end())
      it = plan_sets
             .emplace(plan_key(m), build_agents(config, instance, m, map))
             .first;
    return it->second;
  };

  MapOutcome outcome;
  std::vector<MethodScores> scores;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    const auto& method = config.methods[mi];
    std::vector<double> collected;
    std::vector<ScheduledPlan> scheduled;
    double reported_energy = 0.0;
    double audited_energy = 0.0;
    BaselineResult baseline;

    if (uses_plans(method)) {
      const auto& agents = agents_for(method);
      std::vector<int> selections;
      if (method.kind == MethodKind::epos) {
        const auto result = coordinate(config, instance, agents, method, map, mi);
        selections = result.best.selections;
        collected = aggregate_sensing(agents, selections, targets.size());
        outcome.traces.push_back({config.scenario.name, map, label, method.name,
                                  result.best_repetition,
                                  result.best.rss_trace});
      } else {
        selections = min_energy(agents);
        collected = aggregate_sensing(agents, selections, targets.size());
      }
      for (std::size_t a = 0; a < agents.size(); ++a) {
        const Plan& plan = agents[a].plans[selections[a]];
        scheduled.push_back({dispatches[a].start_unit, &plan});
        reported_energy += plan.cost;
        // Independent re-derivation from the plan's own accounting.
        audited_energy += power.flying_power * plan.flight_time +
                          plan.total_sensing() /
                            config.drone.sensing_frequency * power.hover_power;
      }
    } else {
      if (method.kind == MethodKind::greedy) {
        GreedyOptions options;
        options.view = method.view;
        options.per_period_ledger = config.scenario.per_period_ledger;
        options.horizon_units = horizon;
        options.period_targets = instance.period_targets;
        baseline =
          greedy_sensing(config.drone, power, sensing_map, dispatches, options);
      } else {
        baseline = round_robin(config.drone, power, sensing_map, dispatches,
                               method.cells_per_dispatch, horizon);
      }
      collected = baseline.collected;
      scheduled = baseline.scheduled();
      reported_energy = baseline.total_energy;
      for (const auto& record : baseline.dispatches)
        audited_energy += power.flying_power * record.plan.flight_time +
                          record.plan.total_sensing() /
                            config.drone.sensing_frequency * power.hover_power;
    }

    if (relative_gap(reported_energy, audited_energy) > kAuditTolerance)
      throw std::runtime_error("energy audit failed for " + method.name +
                               ": reported " + format_number(reported_energy) +
                               " J, re-derived " +
                               format_number(audited_energy) + " J");

    MetricRecord r;
    r.scenario = config.scenario.name;
    r.map = map;
    r.map_seed = instance.map_seed;
    r.sweep = label;
    r.method = method.name;
    r.dispatches = config.scenario.dispatches;
    r.total_energy_kj = reported_energy / 1000.0;
    r.sensing_mismatch = sensing_mismatch(collected, targets);
    r.unit_rss = unit_scaled_rss(collected, targets);
    const auto ineff = mission_inefficiency(collected, targets);
    r.mission_inefficiency = ineff.value;
    r.over_collected = ineff.over_collected;
    r.occupancy_conflicts = occupancy_conflicts(scheduled).count;
    if (instance.traffic) {
      const auto t = traffic_scores(*instance.traffic, scheduled);
      r.traffic_accuracy = t.accuracy;
      r.traffic_efficiency = t.efficiency;
    }
    scores.push_back({r.total_energy_kj, r.sensing_mismatch,
                      r.mission_inefficiency});
    outcome.records.push_back(std::move(r));
  }

  const auto combined = combined_cost(scores);
  for (std::size_t i = 0; i < combined.size(); ++i)
    outcome.records[i].combined_cost = combined[i];
  return outcome;
}

RunSummary run_experiment(const ExperimentConfig& config)
{
  validate(config);
  RunSummary summary;
  summary.directory = prepare_directory(config);
  const auto jobs = expand_jobs(config);

  Manifest manifest(config, "run", summary.directory);
  json seeds = json::array();
  for (const auto& job : jobs)
    seeds.push_back(
      {{"sweep", job.label},
       {"map", job.map},
       {"map_seed", derive_seed(config.seed, {kMapStream, std::uint64_t(job.map)})}});
  manifest.set_map_seeds(seeds);
  manifest.add_output("metrics.csv");
  manifest.add_output("rss_trace.csv");
  manifest.write();

  std::vector<std::optional<MapOutcome>> outcomes;
  std::vector<std::string> errors;
  fan_out<MapOutcome>(
    static_cast<int>(jobs.size()), config.workers,
    [&](int i) { return evaluate_map(jobs[i].config, jobs[i].map, jobs[i].label); },
    outcomes, errors);

  std::ofstream metrics(summary.directory / "metrics.csv");
  std::ofstream traces(summary.directory / "rss_trace.csv");
  write_metric_header(metrics);
  traces << "scenario,map,sweep,method,repetition,iteration,rss\n";
  for (const auto& outcome : outcomes) {
    if (!outcome)
      continue;
    for (const auto& r : outcome->records) {
      write_metric_record(metrics, r);
      summary.records.push_back(r);
    }
    for (const auto& t : outcome->traces)
      for (std::size_t it = 0; it < t.rss.size(); ++it)
        traces << t.scenario << ',' << t.map << ',' << t.sweep << ','
               << t.method << ',' << t.repetition << ',' << it + 1 << ','
               << format_number(t.rss[it]) << '\n';
  }
  summary.complete = errors.empty();
  manifest.finish(summary.complete, errors);
  return summary;
}

RunSummary export_plans(const ExperimentConfig& config)
{
  validate(config);
  RunSummary summary;
  summary.directory = prepare_directory(config);
  const auto plan_dir = summary.directory / "plans";
  std::filesystem::create_directories(plan_dir);

  // One dataset per distinct plan-generation setting.
  std::vector<const MethodConfig*> settings;
  for (const auto& m : config.methods)
    if (uses_plans(m) &&
        std::none_of(settings.begin(), settings.end(), [&](const auto* s) {
          return plan_key(*s) == plan_key(m);
        }))
      settings.push_back(&m);

  Manifest manifest(config, "export-plans", summary.directory);
  for (int map = 0; map < config.scenario.maps; ++map)
    for (const auto* m : settings)
      manifest.add_output("plans/" + plan_file_name(map, *m));
  manifest.write();

  std::vector<std::optional<int>> done;
  std::vector<std::string> errors;
  fan_out<int>(
    config.scenario.maps, config.workers,
    [&](int map) {
      const auto instance = build_instance(config, map);
      for (const auto* m : settings) {
        const auto agents = build_agents(config, instance, *m, map);
        std::ofstream out(plan_dir / plan_file_name(map, *m));
        write_plan_header(out);
        for (const auto& agent : agents)
          write_plan_records(out, agent.id, agent.plans);
        if (!out)
          throw std::runtime_error("cannot write plan dataset");
      }
      return map;
    },
    done, errors);
  summary.complete = errors.empty();
  manifest.finish(summary.complete, errors);
  return summary;
}

std::vector<StabilityPoint> stability_curve(const ExperimentConfig& config,
                                            int max_maps)
{
  if (max_maps < 1)
    throw std::invalid_argument("stability needs at least one map");
  const auto method =
    std::find_if(config.methods.begin(), config.methods.end(),
                 [](const auto& m) { return m.kind == MethodKind::epos; });
  if (method == config.methods.end())
    throw ConfigError("/methods", "stability needs an EPOS method");
  const auto mi =
    static_cast<std::uint64_t>(method - config.methods.begin());

  std::vector<std::optional<double>> finals;
  std::vector<std::string> errors;
  fan_out<double>(
    max_maps, config.workers,
    [&](int map) {
      const auto instance = build_instance(config, map);
      const auto agents = build_agents(config, instance, *method, map);
      return coordinate(config, instance, agents, *method, map, mi)
        .best.final_rss;
    },
    finals, errors);
  if (!errors.empty())
    throw std::runtime_error(errors.front());

  std::vector<StabilityPoint> curve;
  double sum = 0.0;
  for (int i = 0; i < max_maps; ++i) {
    sum += *finals[i];
    curve.push_back({i + 1, *finals[i], sum / (i + 1)});
  }
  return curve;
}

RunSummary run_stability(const ExperimentConfig& config)
{
  validate(config);
  RunSummary summary;
  summary.directory = prepare_directory(config);
  Manifest manifest(config, "stability", summary.directory);
  manifest.add_output("stability.csv");
  manifest.write();
  try {
    const auto curve = stability_curve(config, config.stability_maps);
    std::ofstream out(summary.directory / "stability.csv");
    out << "maps,final_rss,running_mean\n";
    for (const auto& p : curve)
      out << p.maps << ',' << format_number(p.final_rss) << ','
          << format_number(p.running_mean) << '\n';
    summary.complete = true;
    manifest.finish(true, {});
  } catch (const std::exception& e) {
    manifest.finish(false, {e.what()});
  }
  return summary;
}

} // namespace swarmsense
