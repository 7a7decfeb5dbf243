#include "swarmsense/baselines.hpp"

#include "swarmsense/metrics.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <numeric>
#include <set>

using namespace swarmsense;

namespace {

struct Setup
{
  DroneSpec spec;
  PowerProfile power = power_profile(spec, {});
};

double accounted(const Setup& s, const Plan& plan)
{
  return s.power.flying_power * plan.flight_time +
         plan.total_sensing() / s.spec.sensing_frequency * s.power.hover_power;
}

} // namespace

TEST_CASE("dispatch schedule")
{
  CHECK(dispatches_per_period(1000, 48) == 21);
  CHECK(dispatches_per_period(200, 48) == 5);
  CHECK_THROWS_AS(dispatches_per_period(0, 48), std::invalid_argument);

  SyntheticMapParams params;
  params.stations = 4;
  const auto map = generate_synthetic_map(params, 1);
  const auto d = schedule_dispatches(map, 1000);
  REQUIRE(d.size() == 1000);
  CHECK(d[5].station == 1);
  CHECK(d[20].period == 0);
  CHECK(d[21].period == 1);
  CHECK(d[21].start_unit == map.time.units_per_period);
  CHECK(d.back().period < map.time.periods);
}

TEST_CASE("greedy sensing fills a small target exactly")
{
  const Setup s;
  const auto map = fixtures::line_map({{200, 0}}, {10.0});
  const auto dispatches = schedule_dispatches(map, 3);
  const auto result = greedy_sensing(s.spec, s.power, map, dispatches, {});
  CHECK(result.collected[0] == doctest::Approx(10.0));
  CHECK(mission_inefficiency(result.collected, map.targets()).value ==
        doctest::Approx(0.0).epsilon(1e-12));
  // Later dispatches find nothing left and stay home.
  CHECK(result.dispatches[1].plan.visited.empty());
  CHECK(result.dispatches[1].plan.cost == 0.0);
}

TEST_CASE("local view ignores other dispatches")
{
  const Setup s;
  const auto map = fixtures::line_map({{200, 0}}, {10.0});
  const auto dispatches = schedule_dispatches(map, 3);
  GreedyOptions options;
  options.view = GreedyView::local;
  const auto result = greedy_sensing(s.spec, s.power, map, dispatches, options);
  CHECK(result.collected[0] == doctest::Approx(30.0));
}

TEST_CASE("property: greedy respects the ledger and the battery")
{
  const Setup s;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SyntheticMapParams params;
    params.cells = seed % 2 ? 16 : 64;
    params.stations = 1 + static_cast<int>(seed % 3);
    params.total_target = 2000.0 + 1000.0 * seed;
    const auto map = generate_synthetic_map(params, seed);
    const auto dispatches = schedule_dispatches(map, 60);
    const auto targets = map.targets();
    for (const bool per_period : {false, true}) {
      GreedyOptions options;
      options.per_period_ledger = per_period;
      const auto result =
        greedy_sensing(s.spec, s.power, map, dispatches, options);
      for (std::size_t n = 0; n < targets.size(); ++n)
        CHECK(result.collected[n] <= targets[n] * (1.0 + 1e-12));
      double energy = 0.0;
      for (const auto& record : result.dispatches) {
        CHECK(record.plan.cost <= s.spec.battery_capacity * (1.0 + 1e-12));
        CHECK(accounted(s, record.plan) ==
              doctest::Approx(record.plan.cost).epsilon(1e-9));
        energy += record.plan.cost;
      }
      CHECK(energy == doctest::Approx(result.total_energy));
    }
  }
}

TEST_CASE("round robin")
{
  const Setup s;
  SUBCASE("single cell takes the whole budget")
  {
    const auto map = fixtures::line_map({{300, 0}}, {100.0});
    const auto dispatches = schedule_dispatches(map, 1);
    const auto result = round_robin(s.spec, s.power, map, dispatches, 1);
    const auto& plan = result.dispatches[0].plan;
    CHECK(plan.visited == std::vector<int>{0});
    CHECK(plan.cost == doctest::Approx(s.spec.battery_capacity));
  }
  SUBCASE("rotation covers every cell before repeating")
  {
    SyntheticMapParams params;
    params.cells = 16;
    params.stations = 2;
    const auto map = generate_synthetic_map(params, 2);
    const auto dispatches = schedule_dispatches(map, 4);
    const auto result = round_robin(s.spec, s.power, map, dispatches, 8);
    std::multiset<int> first_two;
    for (int u = 0; u < 2; ++u) {
      const auto& visited = result.dispatches[u].plan.visited;
      CHECK(visited.size() == 8);
      first_two.insert(visited.begin(), visited.end());
    }
    CHECK(std::set<int>(first_two.begin(), first_two.end()).size() == 16);
    for (const auto& record : result.dispatches) {
      CHECK(record.plan.cost <= s.spec.battery_capacity * (1.0 + 1e-12));
      const auto& sensing = record.plan.sensing;
      for (const auto& e : sensing)
        CHECK(e.value == doctest::Approx(sensing.front().value));
    }
  }
  SUBCASE("too many cells")
  {
    const auto map = fixtures::line_map({{300, 0}}, {100.0});
    const auto dispatches = schedule_dispatches(map, 1);
    CHECK_THROWS_AS(round_robin(s.spec, s.power, map, dispatches, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(round_robin(s.spec, s.power, map, dispatches, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("min energy picks the last plan")
{
  const Setup s;
  const auto map = generate_synthetic_map({}, 6);
  std::vector<AgentState> agents;
  double cheapest = 0.0;
  for (int u = 0; u < 8; ++u) {
    PlanGenerationOptions options;
    options.plan_count = 16;
    auto plans = generate_plans(s.spec, s.power, map,
                                map.stations[u % map.stations.size()],
                                options, u);
    cheapest += plans.back().cost;
    agents.emplace_back(u, std::move(plans));
  }
  const auto picks = min_energy(agents);
  double energy = 0.0;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    CHECK(picks[a] == 15);
    energy += agents[a].plans[picks[a]].cost;
  }
  CHECK(energy == cheapest);
  const auto coordinated =
    run_coordination(agents, map.targets(), 0.0, 5, 2, 1).best.selections;
  double other = 0.0;
  for (std::size_t a = 0; a < agents.size(); ++a)
    other += agents[a].plans[coordinated[a]].cost;
  CHECK(energy <= other);
}
