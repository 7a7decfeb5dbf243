#ifndef SWARMSENSE_POWER_MODEL_HPP
#define SWARMSENSE_POWER_MODEL_HPP

namespace swarmsense {

/// Physical drone parameters. Defaults are a DJI Phantom 4 Pro class
/// quadrotor with a 275 kJ battery.
struct DroneSpec
{
  double body_mass = 1.07;          ///< kg
  double battery_mass = 0.31;       ///< kg
  double propeller_diameter = 0.35; ///< m
  int propeller_count = 4;
  double ground_speed = 6.94;       ///< m/s
  double drag_force = 4.1134;       ///< N
  double power_efficiency = 0.8;    ///< (0, 1]
  double battery_capacity = 275000; ///< J
  /// Sensing values collected per second of hover: one value per 60 s.
  double sensing_frequency = 1.0 / 60.0;

  double total_mass() const { return body_mass + battery_mass; }

  /// Throws std::invalid_argument. Speed and drag may be zero (hover case).
  void validate() const;
};

struct Environment
{
  double air_density = 1.225; ///< kg/m^3
  double gravity = 9.81;      ///< m/s^2
};

struct PowerProfile
{
  double flying_power = 0.0; ///< W
  double hover_power = 0.0;  ///< W
  double pitch = 0.0;        ///< rad
  double induced_velocity = 0.0;
};

/// (m_b + m_e) g + drag.
double total_thrust(const DroneSpec& spec, const Environment& env, double drag);

/// Forward pitch that balances the drone's drag: atan(F_d / (m g)).
double pitch_from_drag(const DroneSpec& spec, const Environment& env);

struct InducedVelocity
{
  double velocity = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves v_i = 2T / (pi d^2 r rho sqrt((v cos t)^2 + (v sin t + v_i)^2))
/// with damped fixed-point iteration. Throws SolverError after 10,000
/// iterations without reaching a residual below 1e-10 m/s.
InducedVelocity solve_induced_velocity(double thrust, const DroneSpec& spec,
                                       const Environment& env, double pitch);

inline double induced_velocity(double thrust, const DroneSpec& spec,
                               const Environment& env, double pitch)
{
  return solve_induced_velocity(thrust, spec, env, pitch).velocity;
}

double flying_power(const DroneSpec& spec, const Environment& env);
double hover_power(const DroneSpec& spec, const Environment& env);
PowerProfile power_profile(const DroneSpec& spec, const Environment& env);

} // namespace swarmsense

#endif
