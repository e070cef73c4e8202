#pragma once

#include "advped/sim.hpp"

namespace advped {

/// Gains of the three force components acting on the scripted pedestrian.
struct SocialForceParams {
  double k_v = 100.0;      // N, attraction toward the vehicle along the walking axis
  double k_d = 20.0;       // N, street-crossing push
  double relax_time = 0.5; // s
  double v_max = 2.5;      // m/s
  Vec2 crossing_direction{0.0, 1.0};

  void validate() const;
};

struct SfPedestrianState {
  Vec2 position;
  Vec2 velocity;
};

/// Sum of vehicle attraction, crossing push and the velocity-relaxation term
/// that pulls the velocity toward v_max along the desired direction.
///
/// The attraction is the unit vector toward the vehicle with its
/// crossing-direction component removed, so without a crossing push the
/// pedestrian keeps to its side of the road.
Vec2 compute_force(const SfPedestrianState& ped, const VehicleState& veh,
                   const SocialForceParams& params, double m_p);

/// Second-order position update under a constant force over dt, followed by
/// a speed cap at v_max.
SfPedestrianState step_socialforce(const SfPedestrianState& ped, Vec2 force, double dt,
                                   double m_p, const SocialForceParams& params);

/// View of a social-force pedestrian as a constant-speed point mass (speed
/// and heading taken from its velocity), for collision and braking logic.
PedestrianState as_pedestrian_state(const SfPedestrianState& ped);

}  // namespace advped
