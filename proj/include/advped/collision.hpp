#pragma once

#include "advped/sim.hpp"

namespace advped {

/// Everything known about an impact. All numeric fields are zero when
/// `collided` is false.
struct CollisionOutcome {
  bool collided = false;
  double impact_angle = 0.0;        // rad
  double momentum_change_2d = 0.0;  // kg*m/s
  double momentum_change_1d = 0.0;  // kg*m/s
  double ped_speed_pre = 0.0;       // m/s
  double veh_speed_pre = 0.0;       // m/s
};

/// Closed-disc contact test around the vehicle reference point.
bool detect(const PedestrianState& ped, const VehicleState& veh, const WorldConfig& cfg);

/// Angle of the pedestrian velocity relative to the vehicle heading, (-pi, pi].
double impact_angle(const PedestrianState& ped, const VehicleState& veh);

/// Pedestrian momentum change for a planar elastic impact.
///
/// The post-impact components are formed as
///   vx' = ((m_p - m_c) cos(theta) v_p + 2 m_c v_c) / (m_c + m_p) - cos(theta) v_p
///   vy' = ((m_p - m_c) sin(theta) v_p) / (m_c + m_p) - sin(theta) v_p
/// and the result is m_p (|(vx', vy')| - v_p). The primed terms already
/// subtract the pre-impact components; the expression is kept as written so
/// that reported severities stay comparable with other tools using this form.
///
/// Throws std::domain_error for non-finite input, non-positive masses or
/// negative speeds.
double momentum_change_2d(double m_p, double m_c, double v_p, double v_c, double theta);

/// Pedestrian velocity after a 1D perfectly elastic collision.
double post_collision_speed_1d(double m_p, double m_c, double v_p, double v_c);

/// Vehicle velocity after the same 1D collision (the other half of the pair).
double post_collision_speed_1d_vehicle(double m_p, double m_c, double v_p, double v_c);

/// m_p * (post_collision_speed_1d - v_p).
double momentum_change_1d(double m_p, double m_c, double v_p, double v_c);

/// Full outcome for a pedestrian/vehicle pair. `ped_speed_pre` and
/// `veh_speed_pre` are the speeds before the step that produced contact;
/// the impact angle comes from the pedestrian heading during that step.
CollisionOutcome evaluate_collision(const PedestrianState& ped, const VehicleState& veh,
                                    double ped_speed_pre, double veh_speed_pre,
                                    const WorldConfig& cfg);

}  // namespace advped
