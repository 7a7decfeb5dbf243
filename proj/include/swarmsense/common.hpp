#ifndef SWARMSENSE_COMMON_HPP
#define SWARMSENSE_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>

namespace swarmsense {

/// Planar position in meters.
struct Point
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

using Rng = std::mt19937_64;

/// Shortest round-trip-stable decimal text for CSV output ("%.17g" trimmed to
/// the fewest digits that parse back to the same double).
std::string format_number(double value);

/// Mixes a master seed with a path of integers into an independent stream
/// seed. Used for the seed hierarchy master -> map -> agent -> repetition.
std::uint64_t derive_seed(std::uint64_t master,
                          std::initializer_list<std::uint64_t> path);

/// A dispatch whose route alone exhausts its energy budget, or whose mission
/// does not fit the occupancy horizon.
class InfeasiblePlan : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// The induced-velocity fixed point did not converge.
class SolverError : public std::runtime_error
{
public:
  SolverError(const std::string& what, double last_residual, int iterations)
    : std::runtime_error(what),
      last_residual_(last_residual),
      iterations_(iterations)
  {}

  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

private:
  double last_residual_;
  int iterations_;
};

/// Malformed tabular input. Carries the 1-based line number of the offending
/// row (the header is line 1).
class ParseError : public std::runtime_error
{
public:
  ParseError(const std::string& what, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line)
  {}

  int line() const { return line_; }

private:
  int line_;
};

/// Invalid experiment configuration. `field` is a JSON-pointer style path.
class ConfigError : public std::runtime_error
{
public:
  ConfigError(const std::string& field, const std::string& what)
    : std::runtime_error(field + ": " + what), field_(field)
  {}

  const std::string& field() const { return field_; }

private:
  std::string field_;
};

} // namespace swarmsense

#endif
