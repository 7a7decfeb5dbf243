#include "swarmsense/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace swarmsense {

namespace {

constexpr double kNegligible = 1e-9;

int resolve_horizon(const DroneSpec& spec, const PowerProfile& power,
                    const SensingMap& map, int horizon_units)
{
  return horizon_units > 0
           ? horizon_units
           : default_horizon_units(spec, power, map.time.unit_length_s);
}

Plan finish_plan(const DroneSpec& spec, const SensingMap& map,
                 const BaseStation& station, std::vector<int> order,
                 std::vector<SensingEntry> sensing, double flight_time,
                 double energy, int horizon)
{
  Plan plan;
  plan.visited = std::move(order);
  plan.flight_time = flight_time;
  plan.utilization = energy / spec.battery_capacity;
  std::sort(sensing.begin(), sensing.end(),
            [](const auto& a, const auto& b) { return a.cell < b.cell; });
  plan.sensing = std::move(sensing);
  plan.cost = energy;
  const auto schedule =
    mission_schedule(map, station, plan.visited, plan.sensing,
                     spec.sensing_frequency, spec.ground_speed);
  plan.occupancy = build_occupancy(schedule, map.time.unit_length_s, horizon);
  return plan;
}

void accumulate(BaselineResult& result, const Dispatch& dispatch, Plan plan)
{
  for (const auto& entry : plan.sensing)
    result.collected[entry.cell] += entry.value;
  result.total_energy += plan.cost;
  result.dispatches.push_back({dispatch, std::move(plan)});
}

} // namespace

int dispatches_per_period(int dispatches, int periods)
{
  if (dispatches < 1 || periods < 1)
    throw std::invalid_argument("dispatches and periods must be positive");
  return (dispatches + periods - 1) / periods;
}

std::vector<Dispatch> schedule_dispatches(const SensingMap& map,
                                          int dispatches)
{
  if (map.stations.empty())
    throw std::invalid_argument("map has no base stations");
  const int per_period = dispatches_per_period(dispatches, map.time.periods);
  std::vector<Dispatch> out;
  out.reserve(dispatches);
  for (int u = 0; u < dispatches; ++u) {
    Dispatch d;
    d.index = u;
    d.station = u % static_cast<int>(map.stations.size());
    d.period = u / per_period;
    d.start_unit = d.period * map.time.units_per_period;
    out.push_back(d);
  }
  return out;
}

std::vector<ScheduledPlan> BaselineResult::scheduled() const
{
  std::vector<ScheduledPlan> out;
  out.reserve(dispatches.size());
  for (const auto& record : dispatches)
    out.push_back({record.dispatch.start_unit, &record.plan});
  return out;
}

BaselineResult greedy_sensing(const DroneSpec& spec, const PowerProfile& power,
                              const SensingMap& map,
                              std::span<const Dispatch> dispatches,
                              const GreedyOptions& options)
{
  if (dispatches.empty())
    throw std::invalid_argument("greedy sensing needs at least one dispatch");
  const int horizon = resolve_horizon(spec, power, map, options.horizon_units);
  const double f = spec.sensing_frequency;
  const double v = spec.ground_speed;
  const auto targets = map.targets();

  BaselineResult result;
  result.collected.assign(map.size(), 0.0);

  std::vector<double> ledger = targets;
  int ledger_period = -1;

  for (const auto& dispatch : dispatches) {
    if (options.per_period_ledger && dispatch.period != ledger_period) {
      ledger_period = dispatch.period;
      for (std::size_t n = 0; n < targets.size(); ++n)
        ledger[n] = options.period_targets.empty()
                      ? targets[n] / map.time.periods
                      : options.period_targets.at(
                          static_cast<std::size_t>(dispatch.period) *
                            targets.size() +
                          n);
    }
    std::vector<double> local;
    if (options.view == GreedyView::local)
      local = options.per_period_ledger ? ledger : targets;
    auto& remaining = options.view == GreedyView::global ? ledger : local;

    const BaseStation& station = map.stations.at(dispatch.station);
    Point position = station.position;
    double energy_left = spec.battery_capacity;
    double time_left = horizon * map.time.unit_length_s;
    double flight_time = 0.0;
    std::vector<int> order;
    std::vector<SensingEntry> sensing;
    std::vector<bool> visited(map.size(), false);

    while (true) {
      int next = -1;
      double next_distance = std::numeric_limits<double>::infinity();
      for (std::size_t n = 0; n < map.size(); ++n) {
        if (visited[n] || remaining[n] <= kNegligible)
          continue;
        const double d = distance(position, map.cells[n].center);
        if (d < next_distance) {
          next_distance = d;
          next = static_cast<int>(n);
        }
      }
      if (next < 0)
        break;
      const double back = distance(map.cells[next].center, station.position);
      const double travel = (next_distance + back) / v;
      const double hover_energy_left =
        energy_left - power.flying_power * travel;
      const double hover_time_left = time_left - travel;
      if (hover_energy_left <= 0.0 || hover_time_left <= 0.0)
        break;
      const double values =
        std::min({remaining[next], hover_energy_left / power.hover_power * f,
                  hover_time_left * f});
      if (values <= kNegligible)
        break;

      const double leg = next_distance / v;
      energy_left -= power.flying_power * leg + values / f * power.hover_power;
      time_left -= leg + values / f;
      flight_time += leg;
      remaining[next] -= values;
      visited[next] = true;
      order.push_back(next);
      sensing.push_back({next, values});
      position = map.cells[next].center;
    }
    const double home = distance(position, station.position) / v;
    flight_time += home;
    energy_left -= power.flying_power * home;

    auto plan = finish_plan(spec, map, station, std::move(order),
                            std::move(sensing), flight_time,
                            spec.battery_capacity - energy_left, horizon);
    accumulate(result, dispatch, std::move(plan));
  }
  return result;
}

BaselineResult round_robin(const DroneSpec& spec, const PowerProfile& power,
                           const SensingMap& map,
                           std::span<const Dispatch> dispatches, int k,
                           int horizon_units)
{
  const int cells = static_cast<int>(map.size());
  if (k < 1)
    throw std::invalid_argument("round-robin needs at least one cell");
  if (k > cells)
    throw std::invalid_argument("round-robin cell count " + std::to_string(k) +
                                " exceeds the map size " +
                                std::to_string(cells));
  const int horizon = resolve_horizon(spec, power, map, horizon_units);
  const double horizon_s = horizon * map.time.unit_length_s;
  const double f = spec.sensing_frequency;

  BaselineResult result;
  result.collected.assign(map.size(), 0.0);

  for (const auto& dispatch : dispatches) {
    const BaseStation& station = map.stations.at(dispatch.station);
    std::vector<int> chosen;
    for (int j = 0; j < k; ++j)
      chosen.push_back(static_cast<int>(
        (static_cast<long long>(dispatch.index) * k + j) % cells));

    Tour tour;
    double hover_time = 0.0;
    while (!chosen.empty()) {
      tour = shortest_tour(map, station, chosen, spec.ground_speed);
      const double hover_energy =
        spec.battery_capacity - power.flying_power * tour.flight_time;
      hover_time =
        std::min(hover_energy / power.hover_power, horizon_s - tour.flight_time);
      if (hover_time >= 0.0)
        break;
      chosen.pop_back();
    }

    Plan plan;
    if (chosen.empty()) {
      plan = finish_plan(spec, map, station, {}, {}, 0.0, 0.0, horizon);
    } else {
      auto sensing = mean_allocate(hover_time * f, tour.order);
      const double energy = power.flying_power * tour.flight_time +
                            hover_time * power.hover_power;
      plan = finish_plan(spec, map, station, tour.order, std::move(sensing),
                         tour.flight_time, energy, horizon);
    }
    accumulate(result, dispatch, std::move(plan));
  }
  return result;
}

std::vector<int> min_energy(std::span<const AgentState> agents)
{
  std::vector<int> selections;
  selections.reserve(agents.size());
  for (const auto& agent : agents) {
    int best = 0;
    for (int p = 1; p < static_cast<int>(agent.plans.size()); ++p)
      if (agent.plans[p].cost < agent.plans[best].cost)
        best = p;
    selections.push_back(best);
  }
  return selections;
}

} // namespace swarmsense
