#ifndef SWARMSENSE_PLAN_GENERATION_HPP
#define SWARMSENSE_PLAN_GENERATION_HPP

#include "swarmsense/common.hpp"
#include "swarmsense/power_model.hpp"
#include "swarmsense/scenario.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace swarmsense {

/// Which numbers of visited cells a plan may draw.
enum class MobilityPolicy
{
  mismatch,     ///< 1 or 2 cells
  inefficiency, ///< 3 or 4 cells
  balance,      ///< 1 to 4 cells
};

std::span<const int> visited_cell_choices(MobilityPolicy policy);
std::string_view to_string(MobilityPolicy policy);
MobilityPolicy policy_from_string(std::string_view name);

enum class Allocation
{
  proportional,
  mean,
};

struct SensingEntry
{
  int cell = 0;
  double value = 0.0;

  friend bool operator==(const SensingEntry&, const SensingEntry&) = default;
};

/// Binary unit-by-cell occupancy of one drone. A drone is in at most one cell
/// per time unit, so each unit stores a cell index or -1.
class Occupancy
{
public:
  Occupancy() = default;
  explicit Occupancy(int units) : cells_(static_cast<std::size_t>(units), -1) {}

  int units() const { return static_cast<int>(cells_.size()); }
  int cell_at(int unit) const { return cells_[unit]; }
  bool occupies(int unit, int cell) const
  {
    return unit >= 0 && unit < units() && cells_[unit] == cell;
  }
  void set(int unit, int cell) { cells_[unit] = cell; }
  int occupied_units() const;
  std::span<const int> cells() const { return cells_; }

  friend bool operator==(const Occupancy&, const Occupancy&) = default;

private:
  std::vector<int> cells_;
};

/// One navigation and sensing alternative of a dispatch.
struct Plan
{
  int index = 1;               ///< p in 1..P
  std::vector<int> visited;    ///< tour order, station excluded
  double flight_time = 0.0;    ///< s, hovering excluded
  double utilization = 1.0;    ///< e
  std::vector<SensingEntry> sensing; ///< sorted by cell, zero elsewhere
  Occupancy occupancy;
  double cost = 0.0;           ///< J

  double total_sensing() const;
  double sensing_at(int cell) const;
  std::vector<double> dense_sensing(std::size_t cells) const;

  friend bool operator==(const Plan&, const Plan&) = default;
};

/// A plan placed on the absolute time axis.
struct ScheduledPlan
{
  int start_unit = 0;
  const Plan* plan = nullptr;
};

/// e = 1 - p / (delta * P).
double energy_utilization_ratio(int p, int plan_count, double delta);

/// K-nearest walk inside the station range: a uniform random first cell, then
/// repeatedly the nearest unvisited range cell to the previous pick.
std::vector<int> select_visited_cells(const SensingMap& map,
                                      const BaseStation& station, int k,
                                      Rng& rng);
std::vector<int> select_visited_cells(const SensingMap& map,
                                      const BaseStation& station, int k,
                                      std::uint64_t seed);

struct Tour
{
  std::vector<int> order;
  double length = 0.0;      ///< m, station to station
  double flight_time = 0.0; ///< s
};

/// Nearest-neighbour tour from the station through `cells` and back.
Tour shortest_tour(const SensingMap& map, const BaseStation& station,
                   std::span<const int> cells, double speed);

/// C e - E_f. Throws InfeasiblePlan when negative.
double hover_energy(double capacity, double utilization, double flight_energy);

/// (E_h / P_h) f.
double total_sensing(double hover_energy, double hover_power,
                     double frequency);

/// Split `total` over `visited` in proportion to their targets. Equal split
/// when the visited targets sum to zero.
std::vector<SensingEntry> allocate_sensing(double total,
                                           std::span<const int> visited,
                                           std::span<const double> targets);

std::vector<SensingEntry> mean_allocate(double total,
                                        std::span<const int> visited);

struct ScheduleSegment
{
  enum class Kind
  {
    travel,
    hover,
  };
  Kind kind = Kind::travel;
  int cell = -1;
  double duration = 0.0; ///< s
};

/// Travel and hover legs of a tour: station -> c1 (hover) -> ... -> station.
std::vector<ScheduleSegment>
mission_schedule(const SensingMap& map, const BaseStation& station,
                 std::span<const int> order,
                 std::span<const SensingEntry> sensing, double frequency,
                 double speed);

/// Discretizes a schedule into time units. A unit is marked with the cell the
/// drone hovers over longest in it, provided that hover time is at least the
/// time spent travelling and the time after the mission ends; otherwise the
/// unit stays empty. Throws InfeasiblePlan when the mission is longer than
/// `units * unit_length`.
Occupancy build_occupancy(std::span<const ScheduleSegment> schedule,
                          double unit_length, int units);

struct PlanGenerationOptions
{
  int plan_count = 64;
  double delta = 8.0;
  MobilityPolicy policy = MobilityPolicy::balance;
  Allocation allocation = Allocation::proportional;
  /// Occupancy horizon in time units; 0 sizes it to a full-battery hover.
  int horizon_units = 0;
  int max_retries = 100;
};

/// Time units needed to hold the longest possible mission of `spec`.
int default_horizon_units(const DroneSpec& spec, const PowerProfile& power,
                          double unit_length);

/// Generates `plan_count` plans for one dispatch from `station`. Each plan
/// redraws its cell count and path; infeasible draws are retried up to
/// `max_retries` times before InfeasiblePlan is thrown.
std::vector<Plan> generate_plans(const DroneSpec& spec,
                                 const PowerProfile& power,
                                 const SensingMap& map,
                                 const BaseStation& station,
                                 const PlanGenerationOptions& options,
                                 std::uint64_t seed);

/// Plan dataset rows: agent,plan,visited,flight_time_s,sensing,cost_j.
/// `visited` is space separated; `sensing` is space separated cell:value.
void write_plan_header(std::ostream& out);
void write_plan_records(std::ostream& out, int agent,
                        std::span<const Plan> plans);

} // namespace swarmsense

#endif
