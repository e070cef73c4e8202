#include "advped/collision.hpp"

#include <cmath>
#include <stdexcept>

namespace advped {

namespace {

void check_finite(std::initializer_list<double> values, const char* where) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(where) + ": non-finite input");
  }
}

void check_masses(double m_p, double m_c, const char* where) {
  if (m_p <= 0.0 || m_c <= 0.0) {
    throw std::domain_error(std::string(where) + ": masses must be > 0");
  }
}

}  // namespace

bool detect(const PedestrianState& ped, const VehicleState& veh, const WorldConfig& cfg) {
  return distance(ped, veh) <= cfg.collision_radius;
}

double impact_angle(const PedestrianState& ped, const VehicleState& veh) {
  return wrap_angle(ped.heading - veh.heading);
}

double momentum_change_2d(double m_p, double m_c, double v_p, double v_c, double theta) {
  check_finite({m_p, m_c, v_p, v_c, theta}, "momentum_change_2d");
  check_masses(m_p, m_c, "momentum_change_2d");
  if (v_p < 0.0 || v_c < 0.0) {
    throw std::domain_error("momentum_change_2d: speeds must be >= 0");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double total = m_c + m_p;
  const double vx = ((m_p - m_c) * c * v_p + 2.0 * m_c * v_c) / total - c * v_p;
  const double vy = ((m_p - m_c) * s * v_p) / total - s * v_p;
  return m_p * (std::sqrt(vx * vx + vy * vy) - v_p);
}

double post_collision_speed_1d(double m_p, double m_c, double v_p, double v_c) {
  check_finite({m_p, m_c, v_p, v_c}, "post_collision_speed_1d");
  check_masses(m_p, m_c, "post_collision_speed_1d");
  return ((m_p - m_c) * v_p + 2.0 * m_c * v_c) / (m_c + m_p);
}

double post_collision_speed_1d_vehicle(double m_p, double m_c, double v_p, double v_c) {
  check_finite({m_p, m_c, v_p, v_c}, "post_collision_speed_1d_vehicle");
  check_masses(m_p, m_c, "post_collision_speed_1d_vehicle");
  return ((m_c - m_p) * v_c + 2.0 * m_p * v_p) / (m_c + m_p);
}

double momentum_change_1d(double m_p, double m_c, double v_p, double v_c) {
  return m_p * (post_collision_speed_1d(m_p, m_c, v_p, v_c) - v_p);
}

CollisionOutcome evaluate_collision(const PedestrianState& ped, const VehicleState& veh,
                                    double ped_speed_pre, double veh_speed_pre,
                                    const WorldConfig& cfg) {
  CollisionOutcome out;
  if (!detect(ped, veh, cfg)) return out;
  out.collided = true;
  out.impact_angle = impact_angle(ped, veh);
  out.ped_speed_pre = ped_speed_pre;
  out.veh_speed_pre = veh_speed_pre;
  out.momentum_change_2d =
      momentum_change_2d(cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre, out.impact_angle);
  out.momentum_change_1d = momentum_change_1d(cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre);
  return out;
}

}  // namespace advped
