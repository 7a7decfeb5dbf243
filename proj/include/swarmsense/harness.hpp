#ifndef SWARMSENSE_HARNESS_HPP
#define SWARMSENSE_HARNESS_HPP

#include "swarmsense/baselines.hpp"
#include "swarmsense/plan_generation.hpp"
#include "swarmsense/power_model.hpp"
#include "swarmsense/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace swarmsense {

enum class MethodKind
{
  epos,
  greedy,
  round_robin,
  min_energy,
};

struct MethodConfig
{
  std::string name;
  MethodKind kind = MethodKind::epos;
  double beta = 0.0;
  MobilityPolicy policy = MobilityPolicy::balance;
  Allocation allocation = Allocation::proportional;
  int plan_count = 64;
  double delta = 8.0;
  int iterations = 40;
  int repetitions = 40;
  int cells_per_dispatch = 8;             ///< round-robin k
  GreedyView view = GreedyView::global;
};

enum class ScenarioKind
{
  synthetic,
  traffic,
};

struct ScenarioConfig
{
  std::string name = "basic";
  ScenarioKind kind = ScenarioKind::synthetic;
  SyntheticMapParams map;
  /// Optional JSON map file replacing the generator (synthetic kind only).
  std::string map_file;
  int maps = 200;
  int dispatches = 1000;
  /// Mission length limit in time units; 0 sizes it to a full-battery hover.
  int horizon_units = 0;
  bool per_period_ledger = false;
  /// "sensing" matches per-cell sensing values to the targets. "occupancy"
  /// (traffic kind) matches the unit-by-cell occupancy of the selected plans
  /// to the vehicle counts.
  std::string coordination_target = "sensing";

  // Traffic kind: cells on a lattice of `traffic_columns` columns with the
  // given pitch, one station at each end of the middle row.
  SyntheticTrafficParams traffic;
  std::string traffic_file;
  double traffic_cap = 500.0;
  int traffic_columns = 5;
  double traffic_pitch = 200.0;
};

struct SweepConfig
{
  std::string axis;
  std::vector<double> values;
};

struct ExperimentConfig
{
  std::string preset = "basic";
  ScenarioConfig scenario;
  DroneSpec drone;
  Environment environment;
  std::vector<MethodConfig> methods;
  std::optional<SweepConfig> sweep;
  std::uint64_t seed = 1;
  std::string output = "results";
  int stability_maps = 50;
  int workers = 1;
};

/// Sweepable parameter names.
const std::vector<std::string>& sweep_axes();
std::vector<double> default_sweep_values(const std::string& axis);

/// basic, desk or traffic. Throws ConfigError for other names.
ExperimentConfig preset_config(const std::string& name);

nlohmann::json to_json(const ExperimentConfig& config);

/// Overlays `overrides` on `base`. Unknown keys and ill-typed values raise
/// ConfigError naming the offending field path.
ExperimentConfig merge_config(const ExperimentConfig& base,
                              const nlohmann::json& overrides);

/// Throws ConfigError for the first invalid field.
void validate(const ExperimentConfig& config);

/// FNV-1a of the canonical JSON form.
std::uint64_t config_hash(const ExperimentConfig& config);

/// Applies one sweep value to a copy of the config.
ExperimentConfig apply_sweep(ExperimentConfig config, const std::string& axis,
                             double value);

struct MetricRecord
{
  std::string scenario;
  int map = 0;
  std::uint64_t map_seed = 0;
  std::string sweep; ///< "axis=value" or empty
  std::string method;
  int dispatches = 0;
  double total_energy_kj = 0.0;
  double sensing_mismatch = 0.0;
  double unit_rss = 0.0;
  double mission_inefficiency = 0.0;
  bool over_collected = false;
  double combined_cost = 0.0;
  int occupancy_conflicts = 0;
  std::optional<double> traffic_accuracy;
  std::optional<double> traffic_efficiency;
};

void write_metric_header(std::ostream& out);
void write_metric_record(std::ostream& out, const MetricRecord& record);

struct TraceRecord
{
  std::string scenario;
  int map = 0;
  std::string sweep;
  std::string method;
  int repetition = 0;
  std::vector<double> rss;
};

struct MapOutcome
{
  std::vector<MetricRecord> records;
  std::vector<TraceRecord> traces;
};

/// The instance a map index resolves to.
struct ScenarioInstance
{
  SensingMap map;
  std::optional<TrafficScenario> traffic;
  /// Traffic kind: per-(period, cell) split of the targets, period-major.
  std::vector<double> period_targets;
  /// Traffic kind: vehicles per (unit, cell) over all types, unit-major.
  std::vector<double> vehicle_targets;
  std::uint64_t map_seed = 0;
};

ScenarioInstance build_instance(const ExperimentConfig& config, int map);

/// Plans of every dispatch for one method on one instance.
std::vector<AgentState> build_agents(const ExperimentConfig& config,
                                     const ScenarioInstance& instance,
                                     const MethodConfig& method, int map);

/// Runs every method on one map and scores it.
MapOutcome evaluate_map(const ExperimentConfig& config, int map,
                        const std::string& sweep_label = "");

struct RunSummary
{
  std::vector<MetricRecord> records;
  std::filesystem::path directory;
  bool complete = false;
};

/// `run`: every map of the config, or every sweep value when one is set.
RunSummary run_experiment(const ExperimentConfig& config);

/// `export-plans`: plan datasets of every EPOS-style method and map.
RunSummary export_plans(const ExperimentConfig& config);

struct StabilityPoint
{
  int maps = 0;
  double final_rss = 0.0;
  double running_mean = 0.0;
};

/// Running mean of the first EPOS method's final RSS as maps accumulate.
std::vector<StabilityPoint> stability_curve(const ExperimentConfig& config,
                                            int max_maps);

/// `stability`: writes stability.csv.
RunSummary run_stability(const ExperimentConfig& config);

} // namespace swarmsense

#endif
