#include "advped/sim.hpp"

#include <algorithm>

namespace advped {

namespace {

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(key, what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void WorldConfig::validate() const {
  require(finite(dt) && dt > 0.0, "world.dt", "must be > 0");
  require(finite(ped_speed) && ped_speed >= 0.0, "world.ped_speed", "must be >= 0");
  require(finite(veh_speed_init) && veh_speed_init >= 0.0, "world.veh_speed_init",
          "must be >= 0");
  require(finite(brake_decel) && brake_decel >= 0.0, "world.brake_decel", "must be >= 0");
  require(finite(brake_trigger_dist) && brake_trigger_dist >= 0.0,
          "world.brake_trigger_dist", "must be >= 0");
  require(finite(mass_ped) && mass_ped > 0.0, "world.mass_ped", "must be > 0");
  require(finite(mass_veh) && mass_veh > 0.0, "world.mass_veh", "must be > 0");
  require(finite(collision_radius) && collision_radius > 0.0, "world.collision_radius",
          "must be > 0");
  require(finite(driveway_y_min) && finite(driveway_y_max) && driveway_y_min < driveway_y_max,
          "world.driveway_y_min", "must be < driveway_y_max");
  require(finite(ped_start_x_min) && finite(ped_start_x_max) &&
              ped_start_x_min <= ped_start_x_max,
          "world.ped_start_x_min", "must be <= ped_start_x_max");
  require(finite(ped_start_y), "world.ped_start_y", "must be finite");
  require(veh_start.finite(), "world.veh_start", "must be finite");
  require(max_steps >= 1, "world.max_steps", "must be >= 1");
  require(finite(action_bound) && action_bound > 0.0, "world.action_bound", "must be > 0");
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);  // [-pi, pi]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

PedestrianStep step_pedestrian(const PedestrianState& state, double delta_heading,
                               const WorldConfig& cfg) {
  PedestrianStep out;
  double delta = delta_heading;
  if (!std::isfinite(delta)) {
    delta = 0.0;
    out.clamped = true;
  } else if (std::abs(delta) > cfg.action_bound) {
    delta = std::clamp(delta, -cfg.action_bound, cfg.action_bound);
    out.clamped = true;
  }
  out.state = state;
  out.state.heading = wrap_angle(state.heading + delta);
  const double step = cfg.ped_speed * cfg.dt;
  out.state.position.x += step * std::cos(out.state.heading);
  out.state.position.y += step * std::sin(out.state.heading);
  return out;
}

VehicleState step_vehicle(const VehicleState& state, double decel, const WorldConfig& cfg) {
  if (!std::isfinite(decel) || decel < 0.0) {
    throw std::invalid_argument("step_vehicle: deceleration must be finite and >= 0");
  }
  VehicleState next = state;
  const double v = state.speed;
  double travelled = 0.0;
  if (decel > 0.0 && v - decel * cfg.dt <= 0.0) {
    const double t_stop = v / decel;
    travelled = v * t_stop - 0.5 * decel * t_stop * t_stop;
    next.speed = 0.0;
  } else {
    travelled = v * cfg.dt - 0.5 * decel * cfg.dt * cfg.dt;
    next.speed = v - decel * cfg.dt;
  }
  next.position.x += travelled;
  return next;
}

bool in_driveway(Vec2 pos, const WorldConfig& cfg) {
  return pos.y >= cfg.driveway_y_min && pos.y <= cfg.driveway_y_max;
}

double distance(const PedestrianState& ped, const VehicleState& veh) {
  return (ped.position - veh.position).norm();
}

double brake_controller(const PedestrianState& ped, const VehicleState& veh,
                        const WorldConfig& cfg) {
  if (in_driveway(ped.position, cfg) && distance(ped, veh) < cfg.brake_trigger_dist) {
    return cfg.brake_decel;
  }
  return 0.0;
}

}  // namespace advped
