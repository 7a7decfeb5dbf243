#ifndef SWARMSENSE_COORDINATION_HPP
#define SWARMSENSE_COORDINATION_HPP

#include "swarmsense/plan_generation.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace swarmsense {

/// Balanced binary tree in heap layout: position i has children 2i+1, 2i+2.
struct TreeTopology
{
  std::vector<int> order; ///< agent id at each position

  std::size_t size() const { return order.size(); }
  static int parent(int position) { return position == 0 ? -1 : (position - 1) / 2; }
  std::vector<int> children(int position) const;
  int depth() const;
};

/// A seeded permutation of 0..agents-1 filled level by level.
TreeTopology build_balanced_tree(int agents, std::uint64_t seed);

/// RSS between the L2-unit-scaled aggregate and target. An all-zero aggregate
/// is compared as the zero vector and scores 1.
double global_cost(std::span<const double> aggregate,
                   std::span<const double> target);

/// Min-max normalized plan costs; all zero when every cost is equal.
std::vector<double> normalized_local_costs(std::span<const Plan> plans);

struct AgentState
{
  int id = 0;
  std::vector<Plan> plans;
  std::vector<double> local_costs;
  int selected = -1; ///< position in `plans`, -1 before the first choice

  AgentState() = default;
  AgentState(int id, std::vector<Plan> plans);
};

/// argmin over plans of (1-beta) global_cost(others + plan) + beta local
/// cost. Ties go to the lowest position.
int select_plan(const AgentState& agent, std::span<const double> others,
                std::span<const double> target, double beta);

struct RepetitionResult
{
  std::vector<int> selections;    ///< plan position per agent
  std::vector<double> rss_trace;  ///< global cost after each iteration
  std::vector<double> aggregate;
  double final_rss = 0.0;
  TreeTopology tree;
};

/// Iterated bottom-up re-selection with a top-down broadcast of the new
/// aggregate. After the first pass an agent only switches on a strict
/// decrease of its blended cost.
RepetitionResult run_repetition(std::span<const AgentState> agents,
                                const TreeTopology& tree,
                                std::span<const double> target, double beta,
                                int iterations);

struct CoordinationResult
{
  RepetitionResult best;
  int best_repetition = 0;
  std::vector<double> repetition_rss;
};

/// Best of `repetitions` runs, each on a fresh tree. Ties keep the earliest.
CoordinationResult run_coordination(std::span<const AgentState> agents,
                                    std::span<const double> target,
                                    double beta, int iterations,
                                    int repetitions, std::uint64_t seed);

/// Sum of the sensing vectors of the selected plans, recomputed from scratch.
std::vector<double> aggregate_sensing(std::span<const AgentState> agents,
                                      std::span<const int> selections,
                                      std::size_t cells);

struct ConflictReport
{
  int count = 0;
  std::vector<std::pair<int, int>> cells; ///< (absolute unit, cell)
};

/// (unit, cell) pairs occupied by more than one drone.
ConflictReport occupancy_conflicts(std::span<const ScheduledPlan> plans);

} // namespace swarmsense

#endif
