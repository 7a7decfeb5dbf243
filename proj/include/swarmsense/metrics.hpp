#ifndef SWARMSENSE_METRICS_HPP
#define SWARMSENSE_METRICS_HPP

#include "swarmsense/plan_generation.hpp"
#include "swarmsense/power_model.hpp"
#include "swarmsense/scenario.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace swarmsense {

/// Sum over cells of (target - collected)^2 on unscaled vectors.
double raw_rss(std::span<const double> collected,
               std::span<const double> target);

/// log10 of raw_rss, floored at 1e-12.
double sensing_mismatch(std::span<const double> collected,
                        std::span<const double> target);

/// Same quantity the coordination optimizes.
double unit_scaled_rss(std::span<const double> collected,
                       std::span<const double> target);

struct Inefficiency
{
  double value = 0.0;
  bool over_collected = false; ///< value < 0
};

/// 1 - sum(collected) / sum(target), reported uncapped.
Inefficiency mission_inefficiency(std::span<const double> collected,
                                  std::span<const double> target);

struct MethodScores
{
  double total_energy = 0.0;
  double mismatch = 0.0;
  double inefficiency = 0.0;
};

/// Per-method sum of the three scores, each min-max normalized across the
/// methods. A score equal for all methods contributes 0.
std::vector<double> combined_cost(std::span<const MethodScores> methods);

/// log10(1 / sum (observed - actual)^2), the sum floored at 1e-12.
double traffic_accuracy(std::span<const double> observed,
                        std::span<const double> actual);

/// sum(observed) / sum(actual).
double traffic_efficiency(std::span<const double> observed,
                          std::span<const double> actual);

/// Cell-unit pairs covered by at least one drone, indexed unit * cells + cell.
std::vector<std::uint8_t> coverage(std::span<const ScheduledPlan> plans,
                                   int cells, int time_units);

struct TrafficSeries
{
  std::vector<double> observed; ///< V*_m
  std::vector<double> actual;   ///< V_m
};

/// Per time unit: vehicles of `type` in covered cells, and in all cells.
TrafficSeries traffic_series(const TrafficScenario& traffic, int type,
                             std::span<const std::uint8_t> covered);

struct TrafficScores
{
  double accuracy = 0.0;
  double efficiency = 0.0;
};

/// Accuracy and efficiency averaged over vehicle types with traffic.
TrafficScores traffic_scores(const TrafficScenario& traffic,
                             std::span<const ScheduledPlan> plans);

struct Correlation
{
  double r = 0.0;
  double p_value = 0.0; ///< two-sided, NaN with fewer than 3 points
};

/// Pearson correlation. Throws when either sample has zero variance.
Correlation pearson(std::span<const double> x, std::span<const double> y);

struct RankTest
{
  double u = 0.0;
  double z = 0.0;
  double p_value = 0.0; ///< two-sided, normal approximation
};

/// Mann-Whitney U of `a` against `b` with average ranks for ties.
RankTest mann_whitney_u(std::span<const double> a, std::span<const double> b);

struct SweepPoint
{
  int visited = 0;
  double mean = 0.0;
};

struct TheoremOptions
{
  std::vector<int> visited_counts;
  int trials = 100;
  int dispatches = 1000;
};

struct TheoremOneResult
{
  std::vector<SweepPoint> points; ///< mean mission inefficiency per |J|
  Correlation correlation;
};

/// Full-battery missions over uniformly random distinct cells; mean mission
/// inefficiency per visited-cell count and its correlation with the count.
TheoremOneResult theorem_one_sweep(const SensingMap& map,
                                   const DroneSpec& spec,
                                   const PowerProfile& power,
                                   const TheoremOptions& options,
                                   std::uint64_t seed);

struct TheoremTwoResult
{
  std::vector<SweepPoint> points; ///< mean raw RSS per |J|
  bool trend_defined = false;     ///< false for a single point
  bool decreasing = false;        ///< strictly decreasing in |J|
};

/// Same missions as theorem_one_sweep, scoring raw RSS. Counts whose pairwise
/// sums reach the cell count are rejected.
TheoremTwoResult theorem_two_sweep(const SensingMap& map,
                                   const DroneSpec& spec,
                                   const PowerProfile& power,
                                   const TheoremOptions& options,
                                   std::uint64_t seed);

/// Collected vector of one random-cell trial, as used by both sweeps.
std::vector<double> random_mission_trial(const SensingMap& map,
                                         const DroneSpec& spec,
                                         const PowerProfile& power,
                                         int visited, int dispatches, Rng& rng);

} // namespace swarmsense

#endif
