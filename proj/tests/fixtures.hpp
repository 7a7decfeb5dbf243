#ifndef SWARMSENSE_TEST_FIXTURES_HPP
#define SWARMSENSE_TEST_FIXTURES_HPP

#include "swarmsense/scenario.hpp"

#include <vector>

namespace fixtures {

/// Cells at the given centers, one station at the origin.
inline swarmsense::SensingMap line_map(const std::vector<swarmsense::Point>& centers,
                                       const std::vector<double>& targets,
                                       swarmsense::Point station = {0.0, 0.0})
{
  const std::vector<swarmsense::Point> stations{station};
  return swarmsense::make_map(1600.0, centers, targets, stations,
                              swarmsense::TimeStructure{});
}

} // namespace fixtures

#endif
