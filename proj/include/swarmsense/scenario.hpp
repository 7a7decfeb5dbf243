#ifndef SWARMSENSE_SCENARIO_HPP
#define SWARMSENSE_SCENARIO_HPP

#include "swarmsense/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace swarmsense {

/// A grid cell of the sensing map. `target` is the number of sensing values
/// required over the whole horizon.
struct Cell
{
  int index = 0;
  Point center;
  double target = 0.0;
};

/// Departure/return point. `range` lists the cell indices the station serves.
struct BaseStation
{
  int index = 0;
  Point position;
  std::vector<int> range;
};

struct TimeStructure
{
  int periods = 48;
  int units_per_period = 12;
  double unit_length_s = 150.0;

  double period_length_s() const { return units_per_period * unit_length_s; }
  int total_units() const { return periods * units_per_period; }
};

struct SensingMap
{
  double side_length = 1600.0;
  std::vector<Cell> cells;
  std::vector<BaseStation> stations;
  TimeStructure time;

  std::size_t size() const { return cells.size(); }
  std::vector<double> targets() const;
  double total_target() const;
};

/// Throws std::invalid_argument naming the first violated map invariant.
void validate(const SensingMap& map);

struct SyntheticMapParams
{
  int cells = 64;
  int stations = 4;
  double total_target = 20000.0;
  double beta_a = 2.0;
  double beta_b = 2.0;
  double side_length = 1600.0;
  TimeStructure time;
};

/// Square lattice of cells with Beta-distributed targets scaled to
/// `total_target`, stations on a uniform sub-grid, ranges assigned.
SensingMap generate_synthetic_map(const SyntheticMapParams& params,
                                  std::uint64_t seed);

/// Nearest-station (Voronoi) assignment of every cell; ties go to the lower
/// station index.
SensingMap assign_station_ranges(SensingMap map);

/// Builds a map from explicit cell centers and station positions; ranges are
/// assigned by nearest station.
SensingMap make_map(double side_length, std::span<const Point> centers,
                    std::span<const double> targets,
                    std::span<const Point> stations, const TimeStructure& time);

struct CameraGeometry
{
  double pixels = 0.0;
  double focal_length_m = 0.0;
  double ground_sampling_distance = 0.0;
};

/// Minimum hover height for the camera footprint: GSD * c_k / PX.
double hover_height(const CameraGeometry& camera);

/// Vehicle counts per (type, cell, absolute time unit).
class TrafficScenario
{
public:
  TrafficScenario(std::vector<std::string> vehicle_types, int cells,
                  int time_units);

  const std::vector<std::string>& vehicle_types() const { return types_; }
  int cells() const { return cells_; }
  int time_units() const { return units_; }

  std::int64_t count(int type, int cell, int unit) const
  {
    return counts_[index(type, cell, unit)];
  }
  void add(int type, int cell, int unit, std::int64_t value);

  /// Sum over vehicle types and time units for one cell.
  std::int64_t cell_total(int cell) const;

private:
  std::size_t index(int type, int cell, int unit) const
  {
    return (static_cast<std::size_t>(type) * cells_ + cell) * units_ + unit;
  }

  std::vector<std::string> types_;
  int cells_;
  int units_;
  std::vector<std::int64_t> counts_;
};

/// Parses `cell,time_unit,vehicle_type,count` rows (header required).
/// Duplicate (cell, unit, type) rows are summed. Vehicle types are ordered by
/// first appearance.
TrafficScenario load_traffic_scenario(std::istream& in, int cells,
                                      int time_units);

void write_traffic_scenario(std::ostream& out, const TrafficScenario& t);

/// T_n = cap * total_n / max_n total_n.
std::vector<double> traffic_targets(const TrafficScenario& traffic,
                                    double per_cell_cap);

/// traffic_targets split over periods in proportion to each cell's vehicles
/// per period, flattened period-major (index period * cells + cell). A cell
/// without vehicles is split evenly.
std::vector<double> traffic_period_targets(const TrafficScenario& traffic,
                                           double per_cell_cap,
                                           int units_per_period);

struct SyntheticTrafficParams
{
  int cells = 10;
  int time_units = 600;
  int units_per_period = 30;
  std::vector<std::string> vehicle_types = {"car",           "taxi",
                                            "bus",           "medium_vehicle",
                                            "heavy_vehicle", "motorcycle"};
  double mean_rate = 4.0;
  /// Gamma shape of the per-cell intensity; small values give skewed maps.
  double cell_shape = 0.8;
};

/// Poisson counts with a gamma-distributed per-cell intensity, a per-type
/// share and a sinusoidal daily profile over periods.
TrafficScenario generate_synthetic_traffic(const SyntheticTrafficParams& p,
                                           std::uint64_t seed);

nlohmann::json to_json(const SensingMap& map);
SensingMap map_from_json(const nlohmann::json& j);

} // namespace swarmsense

#endif
