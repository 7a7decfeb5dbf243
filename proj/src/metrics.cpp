#include "swarmsense/metrics.hpp"

#include "swarmsense/coordination.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swarmsense {

namespace {

constexpr double kFloor = 1e-12;

void check_sizes(std::size_t a, std::size_t b)
{
  if (a != b)
    throw std::invalid_argument("vector dimensions differ: " +
                                std::to_string(a) + " vs " + std::to_string(b));
}

double sum(std::span<const double> v)
{
  return std::accumulate(v.begin(), v.end(), 0.0);
}

std::vector<double> ranks(std::span<const double> values)
{
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return values[i] < values[j];
  });
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
      ++j;
    const double rank = (i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      out[order[k]] = rank;
    i = j + 1;
  }
  return out;
}

std::vector<double> sweep_means(const SensingMap& map, const DroneSpec& spec,
                                const PowerProfile& power,
                                const TheoremOptions& options,
                                std::uint64_t seed, bool score_rss)
{
  if (options.trials < 1 || options.dispatches < 1)
    throw std::invalid_argument("trials and dispatches must be positive");
  const auto targets = map.targets();
  std::vector<double> means;
  for (std::size_t i = 0; i < options.visited_counts.size(); ++i) {
    const int visited = options.visited_counts[i];
    if (visited < 1 || visited > static_cast<int>(map.size()))
      throw std::invalid_argument("visited-cell count " +
                                  std::to_string(visited) + " out of range");
    double total = 0.0;
    for (int trial = 0; trial < options.trials; ++trial) {
      Rng rng(derive_seed(seed, {std::uint64_t(visited), std::uint64_t(trial)}));
      const auto collected = random_mission_trial(map, spec, power, visited,
                                                  options.dispatches, rng);
      total += score_rss ? raw_rss(collected, targets)
                         : mission_inefficiency(collected, targets).value;
    }
    means.push_back(total / options.trials);
  }
  return means;
}

} // namespace

double raw_rss(std::span<const double> collected,
               std::span<const double> target)
{
  check_sizes(collected.size(), target.size());
  double rss = 0.0;
  for (std::size_t n = 0; n < target.size(); ++n)
    rss += (target[n] - collected[n]) * (target[n] - collected[n]);
  return rss;
}

double sensing_mismatch(std::span<const double> collected,
                        std::span<const double> target)
{
  return std::log10(std::max(raw_rss(collected, target), kFloor));
}

double unit_scaled_rss(std::span<const double> collected,
                       std::span<const double> target)
{
  return global_cost(collected, target);
}

Inefficiency mission_inefficiency(std::span<const double> collected,
                                  std::span<const double> target)
{
  check_sizes(collected.size(), target.size());
  const double required = sum(target);
  if (!(required > 0.0))
    throw std::invalid_argument("total target must be positive");
  const double value = 1.0 - sum(collected) / required;
  return {value, value < 0.0};
}

std::vector<double> combined_cost(std::span<const MethodScores> methods)
{
  std::vector<double> out(methods.size(), 0.0);
  const auto add = [&](auto field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& m : methods) {
      lo = std::min(lo, m.*field);
      hi = std::max(hi, m.*field);
    }
    if (!(hi > lo))
      return;
    for (std::size_t i = 0; i < methods.size(); ++i)
      out[i] += (methods[i].*field - lo) / (hi - lo);
  };
  add(&MethodScores::total_energy);
  add(&MethodScores::mismatch);
  add(&MethodScores::inefficiency);
  return out;
}

double traffic_accuracy(std::span<const double> observed,
                        std::span<const double> actual)
{
  return -std::log10(std::max(raw_rss(observed, actual), kFloor));
}

double traffic_efficiency(std::span<const double> observed,
                          std::span<const double> actual)
{
  check_sizes(observed.size(), actual.size());
  const double total = sum(actual);
  if (!(total > 0.0))
    throw std::invalid_argument("actual traffic is zero");
  return sum(observed) / total;
}

std::vector<std::uint8_t> coverage(std::span<const ScheduledPlan> plans,
                                   int cells, int time_units)
{
  std::vector<std::uint8_t> covered(
    static_cast<std::size_t>(cells) * time_units, 0);
  for (const auto& scheduled : plans) {
    const auto occupied = scheduled.plan->occupancy.cells();
    for (std::size_t m = 0; m < occupied.size(); ++m) {
      const int unit = scheduled.start_unit + static_cast<int>(m);
      if (occupied[m] >= 0 && unit < time_units)
        covered[static_cast<std::size_t>(unit) * cells + occupied[m]] = 1;
    }
  }
  return covered;
}

TrafficSeries traffic_series(const TrafficScenario& traffic, int type,
                             std::span<const std::uint8_t> covered)
{
  const int cells = traffic.cells();
  const int units = traffic.time_units();
  check_sizes(covered.size(), static_cast<std::size_t>(cells) * units);
  TrafficSeries series;
  series.observed.assign(units, 0.0);
  series.actual.assign(units, 0.0);
  for (int m = 0; m < units; ++m)
    for (int n = 0; n < cells; ++n) {
      const double v = static_cast<double>(traffic.count(type, n, m));
      series.actual[m] += v;
      if (covered[static_cast<std::size_t>(m) * cells + n])
        series.observed[m] += v;
    }
  return series;
}

TrafficScores traffic_scores(const TrafficScenario& traffic,
                             std::span<const ScheduledPlan> plans)
{
  const auto covered =
    coverage(plans, traffic.cells(), traffic.time_units());
  TrafficScores scores;
  int types = 0;
  for (int type = 0; type < static_cast<int>(traffic.vehicle_types().size());
       ++type) {
    const auto series = traffic_series(traffic, type, covered);
    if (!(sum(series.actual) > 0.0))
      continue;
    scores.accuracy += traffic_accuracy(series.observed, series.actual);
    scores.efficiency += traffic_efficiency(series.observed, series.actual);
    ++types;
  }
  if (types == 0)
    throw std::invalid_argument("actual traffic is zero");
  scores.accuracy /= types;
  scores.efficiency /= types;
  return scores;
}

Correlation pearson(std::span<const double> x, std::span<const double> y)
{
  check_sizes(x.size(), y.size());
  const double n = static_cast<double>(x.size());
  if (x.size() < 2)
    throw std::invalid_argument("correlation needs at least two points");
  const double mx = sum(x) / n;
  const double my = sum(y) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw std::invalid_argument("correlation undefined for zero variance");

  Correlation c;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (x.size() < 3) {
    c.p_value = std::numeric_limits<double>::quiet_NaN();
  } else if (std::abs(c.r) == 1.0) {
    c.p_value = 0.0;
  } else {
    const double df = n - 2.0;
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    const boost::math::students_t dist(df);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

RankTest mann_whitney_u(std::span<const double> a, std::span<const double> b)
{
  if (a.empty() || b.empty())
    throw std::invalid_argument("both samples must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto r = ranks(pooled);

  const double n1 = static_cast<double>(a.size());
  const double n2 = static_cast<double>(b.size());
  const double rank_sum = std::accumulate(r.begin(), r.begin() + a.size(), 0.0);

  RankTest test;
  test.u = rank_sum - n1 * (n1 + 1.0) / 2.0;

  // Tie-corrected variance.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i])
      ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double n = n1 + n2;
  const double variance =
    n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    test.z = 0.0;
    test.p_value = 1.0;
    return test;
  }
  test.z = (test.u - n1 * n2 / 2.0) / std::sqrt(variance);
  const boost::math::normal standard;
  test.p_value =
    2.0 * boost::math::cdf(boost::math::complement(standard, std::abs(test.z)));
  return test;
}

std::vector<double> random_mission_trial(const SensingMap& map,
                                         const DroneSpec& spec,
                                         const PowerProfile& power,
                                         int visited, int dispatches, Rng& rng)
{
  const auto targets = map.targets();
  std::vector<double> collected(map.size(), 0.0);
  std::vector<int> cells(map.size());
  std::iota(cells.begin(), cells.end(), 0);
  for (int u = 0; u < dispatches; ++u) {
    const auto& station = map.stations[u % map.stations.size()];
    // Partial Fisher-Yates: the first `visited` entries are a uniform draw.
    for (int i = 0; i < visited; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(map.size()) - 1);
      std::swap(cells[i], cells[pick(rng)]);
    }
    const std::span<const int> chosen(cells.data(), visited);
    const auto tour = shortest_tour(map, station, chosen, spec.ground_speed);
    const double hover = std::max(
      0.0, spec.battery_capacity - power.flying_power * tour.flight_time);
    const auto share = allocate_sensing(
      total_sensing(hover, power.hover_power, spec.sensing_frequency),
      tour.order, targets);
    for (const auto& entry : share)
      collected[entry.cell] += entry.value;
  }
  return collected;
}

TheoremOneResult theorem_one_sweep(const SensingMap& map,
                                   const DroneSpec& spec,
                                   const PowerProfile& power,
                                   const TheoremOptions& options,
                                   std::uint64_t seed)
{
  if (options.trials < 30)
    throw std::invalid_argument("at least 30 trials per count are required");
  TheoremOneResult result;
  const auto means = sweep_means(map, spec, power, options, seed, false);
  std::vector<double> x;
  for (std::size_t i = 0; i < means.size(); ++i) {
    result.points.push_back({options.visited_counts[i], means[i]});
    x.push_back(options.visited_counts[i]);
  }
  result.correlation = pearson(x, means);
  return result;
}

TheoremTwoResult theorem_two_sweep(const SensingMap& map,
                                   const DroneSpec& spec,
                                   const PowerProfile& power,
                                   const TheoremOptions& options,
                                   std::uint64_t seed)
{
  const auto& counts = options.visited_counts;
  if (counts.empty())
    throw std::invalid_argument("no visited-cell counts given");
  for (std::size_t i = 0; i < counts.size(); ++i)
    for (std::size_t j = i + 1; j < counts.size(); ++j)
      if (counts[i] + counts[j] >= static_cast<int>(map.size()))
        throw std::invalid_argument(
          "counts " + std::to_string(counts[i]) + " and " +
          std::to_string(counts[j]) + " reach the cell count " +
          std::to_string(map.size()));
  if (!std::is_sorted(counts.begin(), counts.end()) ||
      std::adjacent_find(counts.begin(), counts.end()) != counts.end())
    throw std::invalid_argument("counts must be strictly increasing");

  TheoremTwoResult result;
  const auto means = sweep_means(map, spec, power, options, seed, true);
  for (std::size_t i = 0; i < means.size(); ++i)
    result.points.push_back({counts[i], means[i]});
  result.trend_defined = means.size() >= 2;
  result.decreasing = result.trend_defined;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (!(means[i] < means[i - 1]))
      result.decreasing = false;
  return result;
}

} // namespace swarmsense
