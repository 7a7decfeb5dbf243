#include "swarmsense/power_model.hpp"

#include "swarmsense/common.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace swarmsense {

namespace {

constexpr double kResidualTolerance = 1e-10;
constexpr int kMaxIterations = 10000;
constexpr double kDamping = 0.5;

double rotor_disk_term(const DroneSpec& spec, const Environment& env)
{
  return std::numbers::pi * spec.propeller_diameter * spec.propeller_diameter *
         spec.propeller_count * env.air_density;
}

void validate_geometry(const DroneSpec& spec, const Environment& env)
{
  if (!(spec.propeller_diameter > 0.0) || spec.propeller_count < 1)
    throw std::invalid_argument("propeller geometry must be positive");
  if (!(spec.power_efficiency > 0.0) || spec.power_efficiency > 1.0)
    throw std::invalid_argument("power efficiency must lie in (0, 1]");
  if (!(env.air_density > 0.0) || !(env.gravity > 0.0))
    throw std::invalid_argument("air density and gravity must be positive");
}

} // namespace

void DroneSpec::validate() const
{
  if (!(body_mass > 0.0) || !(battery_mass > 0.0))
    throw std::invalid_argument("drone masses must be positive");
  if (!(propeller_diameter > 0.0) || propeller_count < 1)
    throw std::invalid_argument("propeller geometry must be positive");
  if (!(ground_speed >= 0.0) || !(drag_force >= 0.0))
    throw std::invalid_argument("ground speed and drag must be non-negative");
  if (!(power_efficiency > 0.0) || power_efficiency > 1.0)
    throw std::invalid_argument("power efficiency must lie in (0, 1]");
  if (!(battery_capacity > 0.0))
    throw std::invalid_argument("battery capacity must be positive");
  if (!(sensing_frequency > 0.0))
    throw std::invalid_argument("sensing frequency must be positive");
}

double total_thrust(const DroneSpec& spec, const Environment& env, double drag)
{
  if (drag < 0.0)
    throw std::invalid_argument("drag must be non-negative");
  return spec.total_mass() * env.gravity + drag;
}

double pitch_from_drag(const DroneSpec& spec, const Environment& env)
{
  if (spec.drag_force < 0.0)
    throw std::invalid_argument("drag must be non-negative");
  return std::atan2(spec.drag_force, spec.total_mass() * env.gravity);
}

InducedVelocity solve_induced_velocity(double thrust, const DroneSpec& spec,
                                       const Environment& env, double pitch)
{
  if (!(thrust > 0.0))
    throw std::invalid_argument("thrust must be positive");
  validate_geometry(spec, env);

  const double disk = rotor_disk_term(spec, env);
  const double axial = spec.ground_speed * std::cos(pitch);
  const double normal = spec.ground_speed * std::sin(pitch);
  const auto rhs = [&](double vi) {
    return 2.0 * thrust /
           (disk * std::sqrt(axial * axial + (normal + vi) * (normal + vi)));
  };

  // Start from the hover solution; it upper-bounds the forward-flight root.
  double vi = std::sqrt(2.0 * thrust / disk);
  double residual = std::abs(vi - rhs(vi));
  int iteration = 0;
  while (residual >= kResidualTolerance) {
    if (iteration == kMaxIterations)
      throw SolverError("induced velocity did not converge", residual,
                        iteration);
    vi = (1.0 - kDamping) * vi + kDamping * rhs(vi);
    residual = std::abs(vi - rhs(vi));
    ++iteration;
  }
  return {vi, residual, iteration};
}

double flying_power(const DroneSpec& spec, const Environment& env)
{
  return power_profile(spec, env).flying_power;
}

double hover_power(const DroneSpec& spec, const Environment& env)
{
  validate_geometry(spec, env);
  const double weight = total_thrust(spec, env, 0.0);
  return std::pow(weight, 1.5) /
         (spec.power_efficiency * std::sqrt(0.5 * rotor_disk_term(spec, env)));
}

PowerProfile power_profile(const DroneSpec& spec, const Environment& env)
{
  validate_geometry(spec, env);
  const double thrust = total_thrust(spec, env, spec.drag_force);
  const double pitch = pitch_from_drag(spec, env);
  const double vi = induced_velocity(thrust, spec, env, pitch);

  PowerProfile profile;
  profile.pitch = pitch;
  profile.induced_velocity = vi;
  profile.flying_power = (spec.ground_speed * std::sin(pitch) + vi) * thrust /
                         spec.power_efficiency;
  profile.hover_power = hover_power(spec, env);
  return profile;
}

} // namespace swarmsense
