#ifndef SWARMSENSE_BASELINES_HPP
#define SWARMSENSE_BASELINES_HPP

#include "swarmsense/coordination.hpp"
#include "swarmsense/plan_generation.hpp"
#include "swarmsense/power_model.hpp"
#include "swarmsense/scenario.hpp"

#include <span>
#include <vector>

namespace swarmsense {

/// One sortie: station and period it departs in.
struct Dispatch
{
  int index = 0;
  int station = 0;
  int period = 0;
  int start_unit = 0;
};

/// ceil(dispatches / periods).
int dispatches_per_period(int dispatches, int periods);

/// Dispatch u departs from station u mod S in period u / dispatches_per_period.
std::vector<Dispatch> schedule_dispatches(const SensingMap& map,
                                          int dispatches);

/// A dispatch with the mission it flew; `plan.cost` is the energy it spent.
struct DispatchRecord
{
  Dispatch dispatch;
  Plan plan;
};

struct BaselineResult
{
  std::vector<DispatchRecord> dispatches;
  std::vector<double> collected;
  double total_energy = 0.0;

  std::vector<ScheduledPlan> scheduled() const;
};

enum class GreedyView
{
  global, ///< shared ledger of remaining targets
  local,  ///< each dispatch sees only the original targets
};

struct GreedyOptions
{
  GreedyView view = GreedyView::global;
  /// Each period gets its own ledger holding target / periods.
  bool per_period_ledger = false;
  /// Period-major ledger targets replacing the even target / periods split.
  std::vector<double> period_targets;
  /// Mission length limit in time units; 0 sizes it to a full-battery hover.
  int horizon_units = 0;
};

/// Full-battery sorties that repeatedly fly to the nearest cell still short of
/// its target and hover until that target is met or the battery (or the
/// horizon) forces the return.
BaselineResult greedy_sensing(const DroneSpec& spec, const PowerProfile& power,
                              const SensingMap& map,
                              std::span<const Dispatch> dispatches,
                              const GreedyOptions& options);

/// Dispatch u visits cells (u k + j) mod N for j < k, dropping trailing cells
/// while the tour is unaffordable, and splits its hover budget equally.
BaselineResult round_robin(const DroneSpec& spec, const PowerProfile& power,
                           const SensingMap& map,
                           std::span<const Dispatch> dispatches, int k,
                           int horizon_units = 0);

/// Every agent takes its cheapest plan; no coordination.
std::vector<int> min_energy(std::span<const AgentState> agents);

} // namespace swarmsense

#endif
