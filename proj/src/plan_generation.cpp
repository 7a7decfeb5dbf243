#include "swarmsense/plan_generation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace swarmsense {

namespace {

constexpr std::array<int, 2> kMismatchChoices{1, 2};
constexpr std::array<int, 2> kInefficiencyChoices{3, 4};
constexpr std::array<int, 4> kBalanceChoices{1, 2, 3, 4};

const Cell& cell_of(const SensingMap& map, int index)
{
  if (index < 0 || index >= static_cast<int>(map.cells.size()))
    throw std::out_of_range("cell index " + std::to_string(index));
  return map.cells[index];
}

} // namespace

std::span<const int> visited_cell_choices(MobilityPolicy policy)
{
  switch (policy) {
    case MobilityPolicy::mismatch:
      return kMismatchChoices;
    case MobilityPolicy::inefficiency:
      return kInefficiencyChoices;
    case MobilityPolicy::balance:
      break;
  }
  return kBalanceChoices;
}

std::string_view to_string(MobilityPolicy policy)
{
  switch (policy) {
    case MobilityPolicy::mismatch:
      return "mismatch";
    case MobilityPolicy::inefficiency:
      return "inefficiency";
    case MobilityPolicy::balance:
      break;
  }
  return "balance";
}

MobilityPolicy policy_from_string(std::string_view name)
{
  if (name == "mismatch")
    return MobilityPolicy::mismatch;
  if (name == "inefficiency")
    return MobilityPolicy::inefficiency;
  if (name == "balance")
    return MobilityPolicy::balance;
  throw std::invalid_argument("unknown mobility policy '" + std::string(name) +
                              "'");
}

int Occupancy::occupied_units() const
{
  return static_cast<int>(
    std::count_if(cells_.begin(), cells_.end(), [](int c) { return c >= 0; }));
}

double Plan::total_sensing() const
{
  double sum = 0.0;
  for (const auto& entry : sensing)
    sum += entry.value;
  return sum;
}

double Plan::sensing_at(int cell) const
{
  const auto it = std::lower_bound(
    sensing.begin(), sensing.end(), cell,
    [](const SensingEntry& e, int c) { return e.cell < c; });
  return it != sensing.end() && it->cell == cell ? it->value : 0.0;
}

std::vector<double> Plan::dense_sensing(std::size_t cells) const
{
  std::vector<double> out(cells, 0.0);
  for (const auto& entry : sensing)
    out.at(entry.cell) += entry.value;
  return out;
}

double energy_utilization_ratio(int p, int plan_count, double delta)
{
  if (delta * plan_count == 0.0)
    throw std::invalid_argument("delta * P must be non-zero");
  if (p < 1 || p > plan_count)
    throw std::invalid_argument("plan index must lie in 1..P");
  if (delta < 1.0)
    throw std::invalid_argument("delta must be at least 1");
  return 1.0 - static_cast<double>(p) / (delta * plan_count);
}

std::vector<int> select_visited_cells(const SensingMap& map,
                                      const BaseStation& station, int k,
                                      Rng& rng)
{
  const auto& range = station.range;
  if (k < 1 || k > static_cast<int>(range.size()))
    throw std::invalid_argument(
      "cannot visit " + std::to_string(k) + " cells from station " +
      std::to_string(station.index) + " with range of " +
      std::to_string(range.size()));

  std::vector<int> visited;
  visited.reserve(k);
  std::vector<bool> used(range.size(), false);

  std::uniform_int_distribution<std::size_t> first(0, range.size() - 1);
  std::size_t current = first(rng);
  used[current] = true;
  visited.push_back(range[current]);

  while (static_cast<int>(visited.size()) < k) {
    const Point from = cell_of(map, range[current]).center;
    std::size_t best = range.size();
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < range.size(); ++i) {
      if (used[i])
        continue;
      const double d = distance(from, cell_of(map, range[i]).center);
      if (d < best_distance ||
          (d == best_distance && range[i] < range[best])) {
        best_distance = d;
        best = i;
      }
    }
    used[best] = true;
    visited.push_back(range[best]);
    current = best;
  }
  return visited;
}

std::vector<int> select_visited_cells(const SensingMap& map,
                                      const BaseStation& station, int k,
                                      std::uint64_t seed)
{
  Rng rng(seed);
  return select_visited_cells(map, station, k, rng);
}

Tour shortest_tour(const SensingMap& map, const BaseStation& station,
                   std::span<const int> cells, double speed)
{
  if (cells.empty())
    throw std::invalid_argument("a tour needs at least one cell");
  if (!(speed > 0.0))
    throw std::invalid_argument("ground speed must be positive");

  Tour tour;
  std::vector<int> remaining(cells.begin(), cells.end());
  Point position = station.position;
  while (!remaining.empty()) {
    auto best = remaining.begin();
    double best_distance = std::numeric_limits<double>::infinity();
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      const double d = distance(position, cell_of(map, *it).center);
      if (d < best_distance || (d == best_distance && *it < *best)) {
        best_distance = d;
        best = it;
      }
    }
    tour.length += best_distance;
    position = cell_of(map, *best).center;
    tour.order.push_back(*best);
    remaining.erase(best);
  }
  tour.length += distance(position, station.position);
  tour.flight_time = tour.length / speed;
  return tour;
}

double hover_energy(double capacity, double utilization, double flight_energy)
{
  if (capacity * utilization < 0.0)
    throw std::invalid_argument("energy budget must be non-negative");
  const double remaining = capacity * utilization - flight_energy;
  if (remaining < 0.0)
    throw InfeasiblePlan("flight energy exceeds the budget by " +
                         format_number(-remaining) + " J");
  return remaining;
}

double total_sensing(double hover_energy, double hover_power, double frequency)
{
  if (!(hover_power > 0.0))
    throw std::invalid_argument("hover power must be positive");
  return hover_energy / hover_power * frequency;
}

std::vector<SensingEntry> allocate_sensing(double total,
                                           std::span<const int> visited,
                                           std::span<const double> targets)
{
  if (total < 0.0)
    throw std::invalid_argument("sensing total must be non-negative");
  if (visited.empty())
    throw std::invalid_argument("allocation needs at least one visited cell");
  double visited_target = 0.0;
  for (const int n : visited)
    visited_target += targets[n];
  if (!(visited_target > 0.0))
    return mean_allocate(total, visited);

  std::vector<SensingEntry> out;
  out.reserve(visited.size());
  double assigned = 0.0;
  for (std::size_t i = 0; i + 1 < visited.size(); ++i) {
    const int n = visited[i];
    out.push_back({n, total * targets[n] / visited_target});
    assigned += out.back().value;
  }
  // The last share absorbs rounding so the split sums to `total` exactly.
  out.push_back({visited.back(), std::max(0.0, total - assigned)});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return out;
}

std::vector<SensingEntry> mean_allocate(double total,
                                        std::span<const int> visited)
{
  if (visited.empty())
    throw std::invalid_argument("allocation needs at least one visited cell");
  std::vector<SensingEntry> out;
  out.reserve(visited.size());
  const double share = total / static_cast<double>(visited.size());
  for (std::size_t i = 0; i + 1 < visited.size(); ++i)
    out.push_back({visited[i], share});
  out.push_back({visited.back(),
                 std::max(0.0, total - share * (visited.size() - 1.0))});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  return out;
}

std::vector<ScheduleSegment>
mission_schedule(const SensingMap& map, const BaseStation& station,
                 std::span<const int> order,
                 std::span<const SensingEntry> sensing, double frequency,
                 double speed)
{
  std::vector<ScheduleSegment> schedule;
  Point position = station.position;
  for (const int n : order) {
    const Point next = cell_of(map, n).center;
    schedule.push_back(
      {ScheduleSegment::Kind::travel, -1, distance(position, next) / speed});
    double values = 0.0;
    for (const auto& entry : sensing)
      if (entry.cell == n)
        values += entry.value;
    schedule.push_back({ScheduleSegment::Kind::hover, n, values / frequency});
    position = next;
  }
  schedule.push_back({ScheduleSegment::Kind::travel, -1,
                      distance(position, station.position) / speed});
  return schedule;
}

Occupancy build_occupancy(std::span<const ScheduleSegment> schedule,
                          double unit_length, int units)
{
  if (!(unit_length > 0.0) || units < 1)
    throw std::invalid_argument("occupancy grid must be non-empty");

  double mission = 0.0;
  for (const auto& segment : schedule)
    mission += segment.duration;
  const double horizon = unit_length * units;
  if (mission > horizon * (1.0 + 1e-12))
    throw InfeasiblePlan("mission of " + format_number(mission) +
                         " s overruns the " + format_number(horizon) +
                         " s horizon");

  Occupancy occupancy(units);
  std::map<int, double> hover; // ordered by cell for deterministic ties
  std::vector<int> first_seen;
  for (int m = 0; m < units; ++m) {
    const double lo = m * unit_length;
    const double hi = lo + unit_length;
    hover.clear();
    first_seen.clear();
    double travel = 0.0;
    double busy = 0.0;
    double t = 0.0;
    for (const auto& segment : schedule) {
      const double overlap =
        std::max(0.0, std::min(hi, t + segment.duration) - std::max(lo, t));
      t += segment.duration;
      if (overlap <= 0.0)
        continue;
      busy += overlap;
      if (segment.kind == ScheduleSegment::Kind::travel) {
        travel += overlap;
      } else {
        if (!hover.contains(segment.cell))
          first_seen.push_back(segment.cell);
        hover[segment.cell] += overlap;
      }
    }
    if (first_seen.empty())
      continue;
    int best = first_seen.front();
    for (const int cell : first_seen)
      if (hover[cell] > hover[best])
        best = cell;
    const double idle = unit_length - busy;
    if (hover[best] >= travel && hover[best] >= idle)
      occupancy.set(m, best);
  }
  return occupancy;
}

int default_horizon_units(const DroneSpec& spec, const PowerProfile& power,
                          double unit_length)
{
  // Flying costs more than hovering, so a pure hover is the longest mission.
  const double longest = spec.battery_capacity / power.hover_power;
  return std::max(1, static_cast<int>(std::ceil(longest / unit_length)));
}

std::vector<Plan> generate_plans(const DroneSpec& spec,
                                 const PowerProfile& power,
                                 const SensingMap& map,
                                 const BaseStation& station,
                                 const PlanGenerationOptions& options,
                                 std::uint64_t seed)
{
  if (options.plan_count < 1)
    throw std::invalid_argument("plan count must be at least 1");
  spec.validate();

  std::vector<int> choices;
  for (const int k : visited_cell_choices(options.policy))
    if (k <= static_cast<int>(station.range.size()))
      choices.push_back(k);
  if (choices.empty())
    throw InfeasiblePlan("station " + std::to_string(station.index) +
                         " has too few cells for the " +
                         std::string(to_string(options.policy)) + " policy");

  const int horizon =
    options.horizon_units > 0
      ? options.horizon_units
      : default_horizon_units(spec, power, map.time.unit_length_s);
  const auto targets = map.targets();

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_k(0, choices.size() - 1);

  std::vector<Plan> plans;
  plans.reserve(options.plan_count);
  for (int p = 1; p <= options.plan_count; ++p) {
    const double e =
      energy_utilization_ratio(p, options.plan_count, options.delta);
    bool placed = false;
    for (int attempt = 0; attempt <= options.max_retries && !placed;
         ++attempt) {
      const int k = choices[pick_k(rng)];
      const auto visited = select_visited_cells(map, station, k, rng);
      const auto tour =
        shortest_tour(map, station, visited, spec.ground_speed);
      const double flight_energy = power.flying_power * tour.flight_time;
      if (spec.battery_capacity * e - flight_energy < 0.0)
        continue;
      const double hover = hover_energy(spec.battery_capacity, e, flight_energy);
      const double values =
        total_sensing(hover, power.hover_power, spec.sensing_frequency);

      Plan plan;
      plan.index = p;
      plan.visited = tour.order;
      plan.flight_time = tour.flight_time;
      plan.utilization = e;
      plan.sensing = options.allocation == Allocation::proportional
                       ? allocate_sensing(values, tour.order, targets)
                       : mean_allocate(values, tour.order);
      const auto schedule =
        mission_schedule(map, station, tour.order, plan.sensing,
                         spec.sensing_frequency, spec.ground_speed);
      try {
        plan.occupancy =
          build_occupancy(schedule, map.time.unit_length_s, horizon);
      } catch (const InfeasiblePlan&) {
        continue;
      }
      plan.cost = spec.battery_capacity * e;
      plans.push_back(std::move(plan));
      placed = true;
    }
    if (!placed)
      throw InfeasiblePlan("station " + std::to_string(station.index) +
                           ": no feasible plan " + std::to_string(p) +
                           " after " + std::to_string(options.max_retries) +
                           " retries");
  }
  return plans;
}

void write_plan_header(std::ostream& out)
{
  out << "agent,plan,visited,flight_time_s,sensing,cost_j\n";
}

void write_plan_records(std::ostream& out, int agent,
                        std::span<const Plan> plans)
{
  for (const auto& plan : plans) {
    out << agent << ',' << plan.index << ',';
    for (std::size_t i = 0; i < plan.visited.size(); ++i)
      out << (i ? " " : "") << plan.visited[i];
    out << ',' << format_number(plan.flight_time) << ',';
    for (std::size_t i = 0; i < plan.sensing.size(); ++i)
      out << (i ? " " : "") << plan.sensing[i].cell << ':'
          << format_number(plan.sensing[i].value);
    out << ',' << format_number(plan.cost) << '\n';
  }
}

} // namespace swarmsense
