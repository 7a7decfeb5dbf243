#include "swarmsense/coordination.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace swarmsense {

namespace {

// A switch must beat the incumbent by more than accumulated rounding.
double switch_margin(double current)
{
  return 1e-13 + 1e-10 * std::abs(current);
}

std::vector<double> unit_target(std::span<const double> target)
{
  double norm = 0.0;
  for (const double t : target)
    norm += t * t;
  norm = std::sqrt(norm);
  if (!(norm > 0.0))
    throw std::invalid_argument("target must not be all zero");
  std::vector<double> out(target.begin(), target.end());
  for (auto& t : out)
    t /= norm;
  return out;
}

/// Global cost of others + plan from precomputed dot products of `others`.
class IncrementalCost
{
public:
  IncrementalCost(std::span<const double> others,
                  std::span<const double> unit_target)
    : others_(others), unit_target_(unit_target)
  {
    for (std::size_t n = 0; n < others.size(); ++n) {
      oo_ += others[n] * others[n];
      ot_ += others[n] * unit_target[n];
    }
  }

  /// `norm2` and `dot` are |others|^2 and others . unit_target.
  IncrementalCost(std::span<const double> others,
                  std::span<const double> unit_target, double norm2,
                  double dot)
    : others_(others), unit_target_(unit_target), oo_(norm2), ot_(dot)
  {}

  double operator()(const Plan& plan) const
  {
    double os = 0.0;
    double ss = 0.0;
    double st = 0.0;
    for (const auto& entry : plan.sensing) {
      os += others_[entry.cell] * entry.value;
      ss += entry.value * entry.value;
      st += entry.value * unit_target_[entry.cell];
    }
    const double norm2 = oo_ + 2.0 * os + ss;
    if (!(norm2 > 0.0))
      return 1.0;
    return std::max(0.0, 2.0 - 2.0 * (ot_ + st) / std::sqrt(norm2));
  }

private:
  std::span<const double> others_;
  std::span<const double> unit_target_;
  double oo_ = 0.0;
  double ot_ = 0.0;
};

double blended(const AgentState& agent, int position, const IncrementalCost& g,
               double beta)
{
  return (1.0 - beta) * g(agent.plans[position]) +
         beta * agent.local_costs[position];
}

int argmin_plan(const AgentState& agent, const IncrementalCost& g, double beta)
{
  int best = 0;
  double best_cost = blended(agent, 0, g, beta);
  for (int p = 1; p < static_cast<int>(agent.plans.size()); ++p) {
    const double cost = blended(agent, p, g, beta);
    if (cost < best_cost) {
      best_cost = cost;
      best = p;
    }
  }
  return best;
}

void check_beta(double beta)
{
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("beta must lie in [0, 1]");
}

void add_plan(std::vector<double>& aggregate, const Plan& plan, double sign)
{
  for (const auto& entry : plan.sensing)
    aggregate[entry.cell] += sign * entry.value;
}

/// Dense aggregate with its squared norm and projection on the unit target
/// kept current under sparse updates.
struct RunningAggregate
{
  std::vector<double> values;
  double norm2 = 0.0;
  double dot = 0.0;

  void add(const Plan& plan, double sign, std::span<const double> t)
  {
    for (const auto& entry : plan.sensing) {
      double& a = values[entry.cell];
      const double updated = a + sign * entry.value;
      norm2 += updated * updated - a * a;
      dot += (updated - a) * t[entry.cell];
      a = updated;
    }
  }

  void reset(std::vector<double> exact, std::span<const double> t)
  {
    values = std::move(exact);
    norm2 = 0.0;
    dot = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) {
      norm2 += values[n] * values[n];
      dot += values[n] * t[n];
    }
  }
};

} // namespace

std::vector<int> TreeTopology::children(int position) const
{
  std::vector<int> out;
  for (const int c : {2 * position + 1, 2 * position + 2})
    if (c < static_cast<int>(order.size()))
      out.push_back(c);
  return out;
}

int TreeTopology::depth() const
{
  int depth = 0;
  for (std::size_t filled = 0, level = 1; filled < order.size();
       filled += level, level *= 2)
    ++depth;
  return depth;
}

TreeTopology build_balanced_tree(int agents, std::uint64_t seed)
{
  if (agents < 1)
    throw std::invalid_argument("a tree needs at least one agent");
  TreeTopology tree;
  tree.order.resize(agents);
  std::iota(tree.order.begin(), tree.order.end(), 0);
  Rng rng(seed);
  // Explicit Fisher-Yates: std::shuffle is not portable across libraries.
  for (int i = agents - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(tree.order[i], tree.order[pick(rng)]);
  }
  return tree;
}

double global_cost(std::span<const double> aggregate,
                   std::span<const double> target)
{
  if (aggregate.size() != target.size())
    throw std::invalid_argument("aggregate and target dimensions differ");
  const auto t = unit_target(target);
  const std::vector<double> none(aggregate.size(), 0.0);
  // Scoring the aggregate as a single plan on top of nothing.
  Plan plan;
  for (std::size_t n = 0; n < aggregate.size(); ++n)
    if (aggregate[n] != 0.0)
      plan.sensing.push_back({static_cast<int>(n), aggregate[n]});
  return IncrementalCost(none, t)(plan);
}

std::vector<double> normalized_local_costs(std::span<const Plan> plans)
{
  std::vector<double> out(plans.size(), 0.0);
  if (plans.empty())
    return out;
  const auto [lo, hi] = std::minmax_element(
    plans.begin(), plans.end(),
    [](const Plan& a, const Plan& b) { return a.cost < b.cost; });
  const double span = hi->cost - lo->cost;
  if (!(span > 0.0))
    return out;
  for (std::size_t p = 0; p < plans.size(); ++p)
    out[p] = (plans[p].cost - lo->cost) / span;
  return out;
}

AgentState::AgentState(int id, std::vector<Plan> plans)
  : id(id), plans(std::move(plans))
{
  if (this->plans.empty())
    throw std::invalid_argument("agent " + std::to_string(id) +
                                " has no plans");
  local_costs = normalized_local_costs(this->plans);
}

int select_plan(const AgentState& agent, std::span<const double> others,
                std::span<const double> target, double beta)
{
  check_beta(beta);
  if (others.size() != target.size())
    throw std::invalid_argument("aggregate and target dimensions differ");
  const auto t = unit_target(target);
  return argmin_plan(agent, IncrementalCost(others, t), beta);
}

std::vector<double> aggregate_sensing(std::span<const AgentState> agents,
                                      std::span<const int> selections,
                                      std::size_t cells)
{
  std::vector<double> aggregate(cells, 0.0);
  for (std::size_t a = 0; a < agents.size(); ++a)
    if (selections[a] >= 0)
      add_plan(aggregate, agents[a].plans[selections[a]], 1.0);
  return aggregate;
}

RepetitionResult run_repetition(std::span<const AgentState> agents,
                                const TreeTopology& tree,
                                std::span<const double> target, double beta,
                                int iterations)
{
  check_beta(beta);
  if (iterations < 1)
    throw std::invalid_argument("iterations must be at least 1");
  if (tree.size() != agents.size())
    throw std::invalid_argument("tree does not span the agents");
  const auto t = unit_target(target);

  RepetitionResult result;
  result.tree = tree;
  result.selections.assign(agents.size(), -1);
  RunningAggregate aggregate;
  aggregate.reset(std::vector<double>(target.size(), 0.0), t);

  for (int iteration = 0; iteration < iterations; ++iteration) {
    // Bottom-up: deepest positions first, so children precede parents.
    for (int position = static_cast<int>(tree.size()) - 1; position >= 0;
         --position) {
      const int a = tree.order[position];
      const AgentState& agent = agents[a];
      int& selected = result.selections[a];

      // The aggregate temporarily holds everyone else's selections.
      if (selected >= 0)
        aggregate.add(agent.plans[selected], -1.0, t);
      const IncrementalCost g(aggregate.values, t, aggregate.norm2,
                              aggregate.dot);
      const int candidate = argmin_plan(agent, g, beta);
      if (selected < 0) {
        selected = candidate;
      } else if (candidate != selected) {
        const double current = blended(agent, selected, g, beta);
        if (blended(agent, candidate, g, beta) < current - switch_margin(current))
          selected = candidate;
      }
      aggregate.add(agent.plans[selected], 1.0, t);
    }
    // Top-down: the root's aggregate is rebuilt exactly and broadcast.
    aggregate.reset(aggregate_sensing(agents, result.selections, target.size()),
                    t);
    result.rss_trace.push_back(global_cost(aggregate.values, target));
  }
  result.aggregate = std::move(aggregate.values);
  result.final_rss = result.rss_trace.back();
  return result;
}

CoordinationResult run_coordination(std::span<const AgentState> agents,
                                    std::span<const double> target,
                                    double beta, int iterations,
                                    int repetitions, std::uint64_t seed)
{
  if (repetitions < 1)
    throw std::invalid_argument("repetitions must be at least 1");
  CoordinationResult result;
  for (int r = 0; r < repetitions; ++r) {
    const auto tree = build_balanced_tree(static_cast<int>(agents.size()),
                                          derive_seed(seed, {std::uint64_t(r)}));
    auto run = run_repetition(agents, tree, target, beta, iterations);
    result.repetition_rss.push_back(run.final_rss);
    if (r == 0 || run.final_rss < result.best.final_rss) {
      result.best = std::move(run);
      result.best_repetition = r;
    }
  }
  return result;
}

ConflictReport occupancy_conflicts(std::span<const ScheduledPlan> plans)
{
  std::vector<std::pair<int, int>> occupied;
  for (const auto& scheduled : plans) {
    const auto cells = scheduled.plan->occupancy.cells();
    for (std::size_t m = 0; m < cells.size(); ++m)
      if (cells[m] >= 0)
        occupied.emplace_back(scheduled.start_unit + static_cast<int>(m),
                              cells[m]);
  }
  std::sort(occupied.begin(), occupied.end());
  ConflictReport report;
  for (std::size_t i = 1; i < occupied.size(); ++i)
    if (occupied[i] == occupied[i - 1] &&
        (report.cells.empty() || report.cells.back() != occupied[i]))
      report.cells.push_back(occupied[i]);
  report.count = static_cast<int>(report.cells.size());
  return report;
}

} // namespace swarmsense
