#pragma once

#include <numbers>
#include <random>

#include "advped/collision.hpp"
#include "advped/nn.hpp"
#include "advped/reward.hpp"
#include "advped/sim.hpp"

namespace advped {

inline constexpr int kObservationDim = 8;

/// Divisors that bring each observation component to order one.
struct ObservationNorms {
  double position = 50.0;           // m
  double speed = 10.0;              // m/s
  double angle = std::numbers::pi;  // rad
};

/// [x_veh, y_veh, x_ped, y_ped, v_veh, v_ped, theta_veh, theta_ped], normalized.
using Observation = Vector;

Observation observe(const SimState& sim, const ObservationNorms& norms);

struct StepInfo {
  TransitionKind kind = TransitionKind::Away;
  bool collided = false;
  bool timeout = false;
  bool braking = false;
  bool action_clamped = false;
  double momentum_2d = 0.0;
  double momentum_1d = 0.0;
  double distance = 0.0;
  CollisionOutcome collision;
  SimState state;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

/// The crossing scenario as a Markov decision process: the pedestrian's
/// heading change is the action, the scripted vehicle brakes per the
/// driveway/distance rule, and the active reward design scores each step.
class PedestrianEnv {
 public:
  PedestrianEnv(WorldConfig world, RewardDesign design, RewardOptions reward_opts = {},
                ObservationNorms norms = {});

  /// Random start on the sidewalk line; vehicle at its start, both at their
  /// initial speeds, pedestrian facing the road.
  Observation reset(std::mt19937_64& rng);

  /// Start with the pedestrian at an explicit position.
  Observation reset_at(Vec2 ped_start);

  /// Throws std::logic_error when called after the episode finished.
  StepOutcome step(double action);

  const SimState& state() const { return sim_; }
  bool done() const { return done_; }
  double last_distance() const { return prev_dist_; }
  const WorldConfig& world() const { return world_; }
  const ObservationNorms& norms() const { return norms_; }
  RewardDesign design() const { return design_; }

 private:
  WorldConfig world_;
  RewardDesign design_;
  RewardOptions reward_opts_;
  ObservationNorms norms_;
  SimState sim_;
  double prev_dist_ = 0.0;
  bool done_ = true;
};

}  // namespace advped
