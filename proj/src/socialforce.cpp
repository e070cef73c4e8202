#include "advped/socialforce.hpp"

#include <cmath>

namespace advped {

void SocialForceParams::validate() const {
  auto ok = [](double v) { return std::isfinite(v); };
  if (!ok(k_v) || k_v < 0.0) throw ConfigError("socialforce.k_v", "must be >= 0");
  if (!ok(k_d) || k_d < 0.0) throw ConfigError("socialforce.k_d", "must be >= 0");
  if (!ok(relax_time) || relax_time <= 0.0) {
    throw ConfigError("socialforce.relax_time", "must be > 0");
  }
  if (!ok(v_max) || v_max <= 0.0) throw ConfigError("socialforce.v_max", "must be > 0");
  if (!crossing_direction.finite() || std::abs(crossing_direction.norm() - 1.0) > 1e-9) {
    throw ConfigError("socialforce.crossing_direction", "must be a unit vector");
  }
}

Vec2 compute_force(const SfPedestrianState& ped, const VehicleState& veh,
                   const SocialForceParams& params, double m_p) {
  // Attraction acts along the walking axis only; crossing is left to f_d.
  const Vec2 rel = veh.position - ped.position;
  const Vec2 cross = params.crossing_direction;
  const double across = rel.x * cross.x + rel.y * cross.y;
  const Vec2 f_v = params.k_v * unit(rel - across * cross);
  const Vec2 f_d = params.k_d * params.crossing_direction;
  const Vec2 desired = params.v_max * unit(f_v + f_d);
  const Vec2 f_p = (m_p / params.relax_time) * (desired - ped.velocity);
  return f_v + f_d + f_p;
}

SfPedestrianState step_socialforce(const SfPedestrianState& ped, Vec2 force, double dt,
                                   double m_p, const SocialForceParams& params) {
  SfPedestrianState next;
  next.position = ped.position + dt * ped.velocity + (dt * dt / (2.0 * m_p)) * force;
  next.velocity = ped.velocity + (dt / m_p) * force;
  const double speed = next.velocity.norm();
  if (speed > params.v_max) next.velocity = (params.v_max / speed) * next.velocity;
  return next;
}

PedestrianState as_pedestrian_state(const SfPedestrianState& ped) {
  PedestrianState out;
  out.position = ped.position;
  out.speed = ped.velocity.norm();
  out.heading = out.speed > 0.0 ? wrap_angle(std::atan2(ped.velocity.y, ped.velocity.x)) : 0.0;
  return out;
}

}  // namespace advped
