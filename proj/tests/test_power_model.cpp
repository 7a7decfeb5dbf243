#include "swarmsense/power_model.hpp"

#include "swarmsense/common.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace swarmsense;

namespace {

// Frozen from tests/oracles/power_oracle.py (mpmath, bracketed root solve).
constexpr double kWeight = 13.5378;
constexpr double kThrust = 17.6512;
constexpr double kPitch = 0.2949810578701855;
constexpr double kInducedFlying = 2.3546716572437975;
constexpr double kInducedHover = 3.7892043221519671;
constexpr double kFlyingPower = 96.469995563720249;
constexpr double kHoverPower = 64.121862840536125;

bool close(double a, double b, double rel)
{
  return std::abs(a - b) <= rel * std::abs(b);
}

} // namespace

TEST_CASE("thrust")
{
  const DroneSpec spec;
  const Environment env;
  CHECK(close(total_thrust(spec, env, 0.0), kWeight, 1e-12));
  CHECK(close(total_thrust(spec, env, spec.drag_force), kThrust, 1e-12));
  DroneSpec massless;
  massless.body_mass = 0.0;
  massless.battery_mass = 0.0;
  CHECK(total_thrust(massless, env, 0.0) == 0.0);
}

TEST_CASE("pitch")
{
  const Environment env;
  DroneSpec spec;
  CHECK(close(pitch_from_drag(spec, env), kPitch, 1e-12));
  spec.drag_force = 0.0;
  CHECK(pitch_from_drag(spec, env) == 0.0);
  spec.drag_force = spec.total_mass() * env.gravity;
  CHECK(pitch_from_drag(spec, env) == doctest::Approx(std::numbers::pi / 4));
}

TEST_CASE("induced velocity")
{
  const Environment env;
  DroneSpec spec;
  const auto fly = solve_induced_velocity(kThrust, spec, env, kPitch);
  CHECK(close(fly.velocity, kInducedFlying, 1e-9));
  CHECK(fly.residual < 1e-10);

  spec.ground_speed = 0.0;
  const double hover = induced_velocity(kWeight, spec, env, 0.0);
  CHECK(close(hover, kInducedHover, 1e-9));
  CHECK(close(induced_velocity(4.0 * kWeight, spec, env, 0.0), 2.0 * hover,
              1e-9));

  // Back-substitution into the defining equation.
  const DroneSpec d;
  const double disk = std::numbers::pi * d.propeller_diameter *
                      d.propeller_diameter * d.propeller_count *
                      env.air_density;
  const double vx = d.ground_speed * std::cos(kPitch);
  const double vz = d.ground_speed * std::sin(kPitch) + fly.velocity;
  CHECK(std::abs(fly.velocity - 2.0 * kThrust / (disk * std::hypot(vx, vz))) <
        1e-10);
}

TEST_CASE("flying and hover power against the oracle")
{
  const DroneSpec spec;
  const Environment env;
  CHECK(close(flying_power(spec, env), kFlyingPower, 1e-9));
  CHECK(close(hover_power(spec, env), kHoverPower, 1e-9));
  // P^h = v_i(hover) T / eps.
  CHECK(close(hover_power(spec, env),
              kInducedHover * kWeight / spec.power_efficiency, 1e-9));
  const auto profile = power_profile(spec, env);
  CHECK(profile.flying_power == flying_power(spec, env));
  CHECK(profile.hover_power == hover_power(spec, env));
}

TEST_CASE("degenerate forward flight equals hover")
{
  const Environment env;
  DroneSpec still;
  still.ground_speed = 0.0;
  still.drag_force = 0.0;
  CHECK(close(flying_power(still, env), hover_power(still, env), 1e-9));
}

TEST_CASE("efficiency divides power")
{
  const Environment env;
  DroneSpec spec;
  const double base = flying_power(spec, env);
  spec.power_efficiency /= 2.0;
  CHECK(close(flying_power(spec, env), 2.0 * base, 1e-12));
}

TEST_CASE("hover power vanishes with mass")
{
  const Environment env;
  DroneSpec spec;
  spec.body_mass = 1e-9;
  spec.battery_mass = 0.0;
  CHECK(hover_power(spec, env) < 1e-9);
}

TEST_CASE("endurance sanity")
{
  const DroneSpec spec;
  const double endurance = spec.battery_capacity / flying_power(spec, {});
  CHECK(endurance >= 2000.0);
  CHECK(endurance <= 4000.0);
}

TEST_CASE("property: flying power increases in mass and drag")
{
  Rng rng(2024);
  std::uniform_real_distribution<double> mass(0.3, 3.0);
  std::uniform_real_distribution<double> drag(0.0, 8.0);
  std::uniform_real_distribution<double> speed(0.5, 15.0);
  const Environment env;
  for (int i = 0; i < 200; ++i) {
    DroneSpec spec;
    spec.body_mass = mass(rng);
    spec.drag_force = drag(rng);
    spec.ground_speed = speed(rng);
    const double base = flying_power(spec, env);
    DroneSpec heavier = spec;
    heavier.body_mass += 0.1;
    CHECK(flying_power(heavier, env) > base);
    DroneSpec draggier = spec;
    draggier.drag_force += 0.1;
    CHECK(flying_power(draggier, env) > base);
  }
}

TEST_CASE("invalid specs are rejected")
{
  DroneSpec spec;
  spec.power_efficiency = 0.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = DroneSpec{};
  spec.ground_speed = 0.0;
  spec.drag_force = 0.0;
  CHECK_NOTHROW(spec.validate());
}
