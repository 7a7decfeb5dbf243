#include "swarmsense/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace swarmsense {

std::vector<double> SensingMap::targets() const
{
  std::vector<double> out;
  out.reserve(cells.size());
  for (const auto& cell : cells)
    out.push_back(cell.target);
  return out;
}

double SensingMap::total_target() const
{
  double sum = 0.0;
  for (const auto& cell : cells)
    sum += cell.target;
  return sum;
}

void validate(const SensingMap& map)
{
  if (map.side_length <= 0.0)
    throw std::invalid_argument("map side length must be positive");
  if (map.time.periods < 1 || map.time.units_per_period < 1 ||
      map.time.unit_length_s <= 0.0)
    throw std::invalid_argument("map time structure must be positive");
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    const auto& cell = map.cells[i];
    if (cell.index != static_cast<int>(i))
      throw std::invalid_argument("cell indices must be 0..N-1 in order");
    if (!(cell.target >= 0.0))
      throw std::invalid_argument("cell " + std::to_string(i) +
                                  " has a negative target");
    if (cell.center.x < 0.0 || cell.center.y < 0.0 ||
        cell.center.x > map.side_length || cell.center.y > map.side_length)
      throw std::invalid_argument("cell " + std::to_string(i) +
                                  " lies outside the map");
  }
  if (map.stations.empty())
    throw std::invalid_argument("map needs at least one base station");

  std::vector<int> owner(map.cells.size(), -1);
  for (std::size_t s = 0; s < map.stations.size(); ++s) {
    const auto& station = map.stations[s];
    if (station.index != static_cast<int>(s))
      throw std::invalid_argument("station indices must be 0..S-1 in order");
    for (const int n : station.range) {
      if (n < 0 || n >= static_cast<int>(map.cells.size()))
        throw std::invalid_argument("station range names unknown cell");
      if (owner[n] != -1)
        throw std::invalid_argument("cell " + std::to_string(n) +
                                    " belongs to two stations");
      owner[n] = static_cast<int>(s);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end())
    throw std::invalid_argument("station ranges do not cover every cell");
}

SensingMap assign_station_ranges(SensingMap map)
{
  if (map.stations.empty())
    throw std::invalid_argument("range assignment needs at least one station");
  for (auto& station : map.stations)
    station.range.clear();

  for (const auto& cell : map.cells) {
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < map.stations.size(); ++s) {
      const double d = distance(cell.center, map.stations[s].position);
      if (d < best_distance) {
        best_distance = d;
        best = s;
      }
    }
    map.stations[best].range.push_back(cell.index);
  }
  return map;
}

SensingMap make_map(double side_length, std::span<const Point> centers,
                    std::span<const double> targets,
                    std::span<const Point> stations, const TimeStructure& time)
{
  if (centers.size() != targets.size())
    throw std::invalid_argument("one target per cell center required");

  SensingMap map;
  map.side_length = side_length;
  map.time = time;
  for (std::size_t i = 0; i < centers.size(); ++i)
    map.cells.push_back({static_cast<int>(i), centers[i], targets[i]});
  for (std::size_t s = 0; s < stations.size(); ++s)
    map.stations.push_back({static_cast<int>(s), stations[s], {}});
  map = assign_station_ranges(std::move(map));
  validate(map);
  return map;
}

SensingMap generate_synthetic_map(const SyntheticMapParams& params,
                                  std::uint64_t seed)
{
  if (params.cells < 1)
    throw std::invalid_argument("cell count must be positive");
  const int per_side =
    static_cast<int>(std::lround(std::sqrt(static_cast<double>(params.cells))));
  if (per_side * per_side != params.cells)
    throw std::invalid_argument("cell count " + std::to_string(params.cells) +
                                " is not a perfect square");
  if (params.stations < 1)
    throw std::invalid_argument("at least one base station required");
  if (params.stations > params.cells)
    throw std::invalid_argument("more stations than cells");
  if (!(params.total_target > 0.0))
    throw std::invalid_argument("total target must be positive");
  if (params.beta_a <= 0.0 || params.beta_b <= 0.0)
    throw std::invalid_argument("beta shape parameters must be positive");

  Rng rng(seed);
  std::gamma_distribution<double> gamma_a(params.beta_a, 1.0);
  std::gamma_distribution<double> gamma_b(params.beta_b, 1.0);

  std::vector<double> raw(params.cells);
  for (auto& value : raw) {
    const double x = gamma_a(rng);
    const double y = gamma_b(rng);
    value = x / (x + y);
  }
  double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (raw_sum <= 0.0) {
    std::fill(raw.begin(), raw.end(), 1.0);
    raw_sum = static_cast<double>(raw.size());
  }

  const double pitch = params.side_length / per_side;
  std::vector<Point> centers;
  std::vector<double> targets;
  for (int r = 0; r < per_side; ++r) {
    for (int c = 0; c < per_side; ++c) {
      centers.push_back({(c + 0.5) * pitch, (r + 0.5) * pitch});
      targets.push_back(raw[centers.size() - 1] * params.total_target /
                        raw_sum);
    }
  }

  const int cols =
    static_cast<int>(std::ceil(std::sqrt(static_cast<double>(params.stations))));
  const int rows = (params.stations + cols - 1) / cols;
  std::vector<Point> stations;
  for (int i = 0; i < params.stations; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    stations.push_back({(c + 0.5) * params.side_length / cols,
                        (r + 0.5) * params.side_length / rows});
  }

  return make_map(params.side_length, centers, targets, stations, params.time);
}

double hover_height(const CameraGeometry& camera)
{
  if (!(camera.pixels > 0.0) || !(camera.focal_length_m > 0.0) ||
      !(camera.ground_sampling_distance > 0.0))
    throw std::invalid_argument("camera geometry fields must be positive");
  return camera.ground_sampling_distance * camera.focal_length_m /
         camera.pixels;
}

// -- traffic -----------------------------------------------------------------

TrafficScenario::TrafficScenario(std::vector<std::string> vehicle_types,
                                 int cells, int time_units)
  : types_(std::move(vehicle_types)), cells_(cells), units_(time_units)
{
  if (cells < 1 || time_units < 1)
    throw std::invalid_argument("traffic dimensions must be positive");
  counts_.assign(types_.size() * static_cast<std::size_t>(cells) * time_units,
                 0);
}

void TrafficScenario::add(int type, int cell, int unit, std::int64_t value)
{
  if (type < 0 || type >= static_cast<int>(types_.size()) || cell < 0 ||
      cell >= cells_ || unit < 0 || unit >= units_)
    throw std::out_of_range("traffic index out of range");
  if (value < 0)
    throw std::invalid_argument("vehicle counts must be non-negative");
  counts_[index(type, cell, unit)] += value;
}

std::int64_t TrafficScenario::cell_total(int cell) const
{
  std::int64_t total = 0;
  for (std::size_t t = 0; t < types_.size(); ++t)
    for (int m = 0; m < units_; ++m)
      total += count(static_cast<int>(t), cell, m);
  return total;
}

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ','))
    fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',')
    fields.emplace_back();
  return fields;
}

long long parse_integer(const std::string& text, const char* what, int line)
{
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ParseError(std::string("malformed ") + what + " '" + text + "'",
                     line);
  }
  if (used != text.size())
    throw ParseError(std::string("malformed ") + what + " '" + text + "'",
                     line);
  return value;
}

struct TrafficRow
{
  int cell;
  int unit;
  std::string type;
  long long count;
};

} // namespace

TrafficScenario load_traffic_scenario(std::istream& in, int cells,
                                      int time_units)
{
  std::string line;
  int line_number = 0;
  bool header_seen = false;
  std::vector<TrafficRow> rows;
  std::vector<std::string> types;

  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty())
      continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "cell" ||
          fields[1] != "time_unit" || fields[2] != "vehicle_type" ||
          fields[3] != "count")
        throw ParseError(
          "expected header 'cell,time_unit,vehicle_type,count'", line_number);
      continue;
    }
    if (fields.size() != 4)
      throw ParseError("expected 4 fields, found " +
                         std::to_string(fields.size()),
                       line_number);
    const auto cell = parse_integer(fields[0], "cell", line_number);
    const auto unit = parse_integer(fields[1], "time_unit", line_number);
    const auto count = parse_integer(fields[3], "count", line_number);
    if (cell < 0 || cell >= cells)
      throw ParseError("unknown cell index " + fields[0], line_number);
    if (unit < 0 || unit >= time_units)
      throw ParseError("time unit " + fields[1] + " outside 0.." +
                         std::to_string(time_units - 1),
                       line_number);
    if (fields[2].empty())
      throw ParseError("empty vehicle type", line_number);
    if (count < 0)
      throw ParseError("negative count " + fields[3], line_number);
    if (std::find(types.begin(), types.end(), fields[2]) == types.end())
      types.push_back(fields[2]);
    rows.push_back({static_cast<int>(cell), static_cast<int>(unit), fields[2],
                    count});
  }
  // A stream with no lines at all is an empty recording, not a format error.
  if (!header_seen)
    return TrafficScenario({}, cells, time_units);

  TrafficScenario traffic(types, cells, time_units);
  for (const auto& row : rows) {
    const auto type = std::find(types.begin(), types.end(), row.type) -
                      types.begin();
    traffic.add(static_cast<int>(type), row.cell, row.unit, row.count);
  }
  return traffic;
}

void write_traffic_scenario(std::ostream& out, const TrafficScenario& t)
{
  out << "cell,time_unit,vehicle_type,count\n";
  for (int n = 0; n < t.cells(); ++n)
    for (int m = 0; m < t.time_units(); ++m)
      for (std::size_t k = 0; k < t.vehicle_types().size(); ++k) {
        const auto c = t.count(static_cast<int>(k), n, m);
        if (c != 0)
          out << n << ',' << m << ',' << t.vehicle_types()[k] << ',' << c
              << '\n';
      }
}

std::vector<double> traffic_targets(const TrafficScenario& traffic,
                                    double per_cell_cap)
{
  if (!(per_cell_cap > 0.0))
    throw std::invalid_argument("per-cell cap must be positive");
  std::vector<double> totals(traffic.cells());
  for (int n = 0; n < traffic.cells(); ++n)
    totals[n] = static_cast<double>(traffic.cell_total(n));
  const double peak = *std::max_element(totals.begin(), totals.end());
  if (peak <= 0.0)
    throw std::invalid_argument("traffic scenario has no vehicles");
  for (auto& value : totals)
    value = value == peak ? per_cell_cap : per_cell_cap * (value / peak);
  return totals;
}

std::vector<double> traffic_period_targets(const TrafficScenario& traffic,
                                           double per_cell_cap,
                                           int units_per_period)
{
  if (units_per_period < 1 || traffic.time_units() % units_per_period != 0)
    throw std::invalid_argument("time units must be a whole number of periods");
  const int periods = traffic.time_units() / units_per_period;
  const int cells = traffic.cells();
  const auto totals = traffic_targets(traffic, per_cell_cap);
  std::vector<double> out(static_cast<std::size_t>(periods) * cells, 0.0);
  for (int n = 0; n < cells; ++n) {
    const double cell_total = static_cast<double>(traffic.cell_total(n));
    for (int p = 0; p < periods; ++p) {
      double in_period = 0.0;
      for (int type = 0; type < static_cast<int>(traffic.vehicle_types().size());
           ++type)
        for (int m = p * units_per_period; m < (p + 1) * units_per_period; ++m)
          in_period += static_cast<double>(traffic.count(type, n, m));
      out[static_cast<std::size_t>(p) * cells + n] =
        cell_total > 0.0 ? totals[n] * in_period / cell_total
                         : totals[n] / periods;
    }
  }
  return out;
}

TrafficScenario generate_synthetic_traffic(const SyntheticTrafficParams& p,
                                           std::uint64_t seed)
{
  if (p.units_per_period < 1 || p.time_units % p.units_per_period != 0)
    throw std::invalid_argument(
      "time units must be a whole number of periods");
  Rng rng(seed);
  TrafficScenario traffic(p.vehicle_types, p.cells, p.time_units);

  std::gamma_distribution<double> intensity(p.cell_shape, 1.0 / p.cell_shape);
  std::vector<double> cell_weight(p.cells);
  for (auto& w : cell_weight)
    w = intensity(rng);

  std::gamma_distribution<double> share_draw(2.0, 1.0);
  std::vector<double> type_share(p.vehicle_types.size());
  double share_sum = 0.0;
  for (auto& s : type_share) {
    s = share_draw(rng);
    share_sum += s;
  }
  for (auto& s : type_share)
    s *= static_cast<double>(type_share.size()) / share_sum;

  std::uniform_real_distribution<double> phase_draw(0.0, 2.0 * std::numbers::pi);
  const double phase = phase_draw(rng);
  const int periods = p.time_units / p.units_per_period;

  for (std::size_t k = 0; k < p.vehicle_types.size(); ++k)
    for (int n = 0; n < p.cells; ++n)
      for (int m = 0; m < p.time_units; ++m) {
        const double period = static_cast<double>(m / p.units_per_period);
        const double daily =
          1.0 + 0.5 * std::sin(phase + 2.0 * std::numbers::pi * period /
                                         std::max(periods, 1));
        const double rate = p.mean_rate * cell_weight[n] * type_share[k] *
                            daily / static_cast<double>(type_share.size());
        if (rate <= 0.0)
          continue;
        std::poisson_distribution<std::int64_t> draw(rate);
        traffic.add(static_cast<int>(k), n, m, draw(rng));
      }
  return traffic;
}

// -- serialization -----------------------------------------------------------

nlohmann::json to_json(const SensingMap& map)
{
  nlohmann::json j;
  j["side_length"] = map.side_length;
  j["time"] = {{"periods", map.time.periods},
               {"units_per_period", map.time.units_per_period},
               {"unit_length_s", map.time.unit_length_s}};
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& cell : map.cells)
    cells.push_back({{"index", cell.index},
                     {"x", cell.center.x},
                     {"y", cell.center.y},
                     {"target", cell.target}});
  auto& stations = j["stations"] = nlohmann::json::array();
  for (const auto& station : map.stations)
    stations.push_back({{"index", station.index},
                        {"x", station.position.x},
                        {"y", station.position.y},
                        {"range", station.range}});
  return j;
}

SensingMap map_from_json(const nlohmann::json& j)
{
  SensingMap map;
  map.side_length = j.at("side_length").get<double>();
  const auto& time = j.at("time");
  map.time.periods = time.at("periods").get<int>();
  map.time.units_per_period = time.at("units_per_period").get<int>();
  map.time.unit_length_s = time.at("unit_length_s").get<double>();
  for (const auto& c : j.at("cells"))
    map.cells.push_back({c.at("index").get<int>(),
                         {c.at("x").get<double>(), c.at("y").get<double>()},
                         c.at("target").get<double>()});
  for (const auto& s : j.at("stations")) {
    BaseStation station{s.at("index").get<int>(),
                        {s.at("x").get<double>(), s.at("y").get<double>()},
                        {}};
    if (s.contains("range"))
      station.range = s.at("range").get<std::vector<int>>();
    map.stations.push_back(std::move(station));
  }
  const bool has_ranges =
    std::any_of(map.stations.begin(), map.stations.end(),
                [](const BaseStation& st) { return !st.range.empty(); });
  if (!has_ranges)
    map = assign_station_ranges(std::move(map));
  validate(map);
  return map;
}

} // namespace swarmsense
