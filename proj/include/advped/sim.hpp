#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace advped {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

// Unit vector along v, or the zero vector when v has no length.
inline Vec2 unit(Vec2 v) {
  const double n = v.norm();
  if (n == 0.0) return {};
  return {v.x / n, v.y / n};
}

/// Raised when a configuration value violates its invariant. `key()` names
/// the offending field so callers can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Scenario geometry, masses, timestep and braking. Defaults reproduce the
/// single-vehicle, single-pedestrian crossing scenario.
struct WorldConfig {
  double dt = 0.05;
  double ped_speed = 2.0;
  double veh_speed_init = 7.0;
  double brake_decel = 2.5;
  double brake_trigger_dist = 10.0;
  double mass_ped = 70.0;
  double mass_veh = 1500.0;
  double collision_radius = 1.5;
  double driveway_y_min = -3.0;
  double driveway_y_max = 3.0;
  double ped_start_x_min = 40.0;
  double ped_start_x_max = 60.0;
  double ped_start_y = -5.0;
  Vec2 veh_start{0.0, 0.0};
  int max_steps = 600;
  double action_bound = std::numbers::pi / 2.0;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;
};

struct PedestrianState {
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;  // (-pi, pi]
};

struct VehicleState {
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;
};

struct SimState {
  PedestrianState pedestrian;
  VehicleState vehicle;
  std::int64_t step_index = 0;
  double elapsed = 0.0;  // step_index * dt, recomputed on every step
};

struct PedestrianStep {
  PedestrianState state;
  bool clamped = false;  // requested heading change exceeded action_bound
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

PedestrianStep step_pedestrian(const PedestrianState& state, double delta_heading,
                               const WorldConfig& cfg);

/// Constant-deceleration update, integrated exactly and truncated at standstill.
VehicleState step_vehicle(const VehicleState& state, double decel, const WorldConfig& cfg);

bool in_driveway(Vec2 pos, const WorldConfig& cfg);

double distance(const PedestrianState& ped, const VehicleState& veh);

/// Scripted controller under test: brake iff the pedestrian is in the
/// driveway band and strictly closer than the trigger distance.
double brake_controller(const PedestrianState& ped, const VehicleState& veh,
                        const WorldConfig& cfg);

}  // namespace advped
