#include "swarmsense/coordination.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace swarmsense;

namespace {

Plan sparse_plan(int index, double cost, std::vector<SensingEntry> sensing)
{
  Plan plan;
  plan.index = index;
  plan.cost = cost;
  plan.sensing = std::move(sensing);
  return plan;
}

std::vector<AgentState> random_agents(Rng& rng, int agents, int plans,
                                      int cells)
{
  std::uniform_int_distribution<int> cell(0, cells - 1);
  std::uniform_real_distribution<double> value(0.5, 20.0);
  std::uniform_int_distribution<int> width(1, std::min(3, cells));
  std::vector<AgentState> out;
  for (int a = 0; a < agents; ++a) {
    std::vector<Plan> set;
    for (int p = 0; p < plans; ++p) {
      std::set<int> chosen;
      const int k = width(rng);
      while (static_cast<int>(chosen.size()) < k)
        chosen.insert(cell(rng));
      std::vector<SensingEntry> sensing;
      for (const int c : chosen)
        sensing.push_back({c, value(rng)});
      set.push_back(sparse_plan(p + 1, 1000.0 - 10.0 * p, std::move(sensing)));
    }
    out.emplace_back(a, std::move(set));
  }
  return out;
}

std::vector<double> random_target(Rng& rng, int cells)
{
  std::uniform_real_distribution<double> value(1.0, 100.0);
  std::vector<double> t(cells);
  for (auto& x : t)
    x = value(rng);
  return t;
}

} // namespace

TEST_CASE("tree shapes")
{
  const auto one = build_balanced_tree(1, 3);
  CHECK(one.size() == 1);
  CHECK(one.depth() == 1);
  CHECK(one.children(0).empty());

  const auto three = build_balanced_tree(3, 3);
  CHECK(three.children(0) == std::vector<int>{1, 2});
  CHECK(three.children(1).empty());
  CHECK(three.depth() == 2);

  const auto seven = build_balanced_tree(7, 3);
  CHECK(seven.depth() == 3);
  for (int p = 1; p < 7; ++p)
    CHECK(TreeTopology::parent(p) == (p - 1) / 2);

  for (int agents = 1; agents < 70; ++agents) {
    const auto tree = build_balanced_tree(agents, agents);
    auto sorted = tree.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> ids(agents);
    std::iota(ids.begin(), ids.end(), 0);
    CHECK(sorted == ids);
    CHECK(tree.depth() ==
          static_cast<int>(std::floor(std::log2(agents))) + 1);
  }
  CHECK(build_balanced_tree(20, 9).order == build_balanced_tree(20, 9).order);
  CHECK_THROWS_AS(build_balanced_tree(0, 1), std::invalid_argument);
}

TEST_CASE("global cost")
{
  const std::vector<double> t{3.0, 4.0, 0.0};
  const std::vector<double> scaled{6.0, 8.0, 0.0};
  CHECK(global_cost(scaled, t) == doctest::Approx(0.0).epsilon(1e-15));
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{0.0, 1.0};
  CHECK(global_cost(a, b) == doctest::Approx(2.0));
  CHECK(global_cost(a, a) == 0.0);
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(global_cost(zero, t) == 1.0);
  const std::vector<double> short_vec{1.0};
  CHECK_THROWS_AS(global_cost(short_vec, t), std::invalid_argument);
  CHECK_THROWS_AS(global_cost(t, zero), std::invalid_argument);

  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_target(rng, 6);
    const auto y = random_target(rng, 6);
    CHECK(global_cost(x, y) == doctest::Approx(oracle::scaled_rss(x, y)));
  }
}

TEST_CASE("local costs are min-max normalized")
{
  std::vector<Plan> plans{sparse_plan(1, 300.0, {}), sparse_plan(2, 200.0, {}),
                          sparse_plan(3, 250.0, {})};
  CHECK(normalized_local_costs(plans) == std::vector<double>{1.0, 0.0, 0.5});
  plans[0].cost = plans[1].cost = plans[2].cost = 5.0;
  CHECK(normalized_local_costs(plans) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("plan selection")
{
  const std::vector<double> target{4.0, 2.0};
  const std::vector<double> others{2.0, 2.0};
  const AgentState agent(0, {sparse_plan(1, 10.0, {{1, 5.0}}),
                             sparse_plan(2, 5.0, {{0, 2.0}}),
                             sparse_plan(3, 1.0, {{1, 1.0}})});
  // Plan 2 completes the residual exactly.
  CHECK(select_plan(agent, others, target, 0.0) == 1);
  CHECK(select_plan(agent, others, target, 1.0) == 2);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    auto agents = random_agents(rng, 1, 2, 2);
    const auto t = random_target(rng, 2);
    const auto o = random_target(rng, 2);
    double costs[2];
    for (int p = 0; p < 2; ++p) {
      auto sum = o;
      for (const auto& e : agents[0].plans[p].sensing)
        sum[e.cell] += e.value;
      costs[p] = oracle::scaled_rss(sum, t);
    }
    const int chosen = select_plan(agents[0], o, t, 0.0);
    CHECK(costs[chosen] <= costs[1 - chosen] + 1e-12);
  }
  CHECK_THROWS_AS(select_plan(agent, others, target, 1.5),
                  std::invalid_argument);
}

TEST_CASE("single agent repetition equals one selection")
{
  Rng rng(8);
  auto agents = random_agents(rng, 1, 6, 4);
  const auto target = random_target(rng, 4);
  const auto run =
    run_repetition(agents, build_balanced_tree(1, 0), target, 0.0, 1);
  const std::vector<double> none(4, 0.0);
  CHECK(run.selections[0] == select_plan(agents[0], none, target, 0.0));
  CHECK(run.rss_trace.size() == 1);
}

TEST_CASE("property: traces are monotone and aggregates exact")
{
  Rng rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int cells = 3 + trial % 8;
    auto agents = random_agents(rng, 5 + trial % 20, 6, cells);
    const auto target = random_target(rng, cells);
    const double beta = (trial % 3) * 0.25;
    const auto result =
      run_coordination(agents, target, beta, 12, 3, 100 + trial);
    for (const double rss : result.repetition_rss)
      CHECK(rss >= result.best.final_rss);
    const auto& trace = result.best.rss_trace;
    if (beta == 0.0)
      for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= trace[i - 1]);
    const auto exact =
      aggregate_sensing(agents, result.best.selections, target.size());
    for (std::size_t n = 0; n < exact.size(); ++n)
      CHECK(std::abs(result.best.aggregate[n] - exact[n]) <=
            1e-9 * std::max(1.0, std::abs(exact[n])));
  }
}

TEST_CASE("beta one picks each agent's cheapest plan")
{
  Rng rng(5);
  // Costs fall with the plan position, so the cheapest is the last.
  const auto agents = random_agents(rng, 9, 5, 6);
  const auto target = random_target(rng, 6);
  const auto result = run_coordination(agents, target, 1.0, 5, 2, 1);
  for (std::size_t a = 0; a < agents.size(); ++a)
    CHECK(result.best.selections[a] == 4);
}

TEST_CASE("small instances against the exhaustive optimum")
{
  Rng rng(77);
  int within = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto agents = random_agents(rng, 4, 2, 3);
    const auto target = random_target(rng, 3);
    const auto result = run_coordination(agents, target, 0.0, 10, 4, trial);
    const double optimum = oracle::exhaustive_minimum(agents, target);
    CHECK(result.best.final_rss >= optimum - 1e-12);
    within += result.best.final_rss <= 1.5 * optimum + 1e-12;
  }
  CHECK(within >= 38);
}

TEST_CASE("coordination is deterministic per seed")
{
  Rng rng(3);
  auto agents = random_agents(rng, 17, 8, 9);
  const auto target = random_target(rng, 9);
  const auto a = run_coordination(agents, target, 0.0, 8, 5, 42);
  const auto b = run_coordination(agents, target, 0.0, 8, 5, 42);
  CHECK(a.best.selections == b.best.selections);
  CHECK(a.repetition_rss == b.repetition_rss);
  const auto single = run_coordination(agents, target, 0.0, 8, 1, 42);
  CHECK(single.repetition_rss.front() == a.repetition_rss.front());
}

TEST_CASE("occupancy conflicts")
{
  Plan solo;
  solo.occupancy = Occupancy(6);
  solo.occupancy.set(1, 2);
  solo.occupancy.set(2, 2);
  Plan copy = solo;

  const std::vector<ScheduledPlan> one{{0, &solo}};
  CHECK(occupancy_conflicts(one).count == 0);

  const std::vector<ScheduledPlan> same{{0, &solo}, {0, &copy}};
  const auto report = occupancy_conflicts(same);
  CHECK(report.count == 2);
  CHECK(report.cells == std::vector<std::pair<int, int>>{{1, 2}, {2, 2}});

  const std::vector<ScheduledPlan> shifted{{0, &solo}, {1, &copy}};
  CHECK(occupancy_conflicts(shifted).count == 1);
  const std::vector<ScheduledPlan> apart{{0, &solo}, {10, &copy}};
  CHECK(occupancy_conflicts(apart).count == 0);
}
