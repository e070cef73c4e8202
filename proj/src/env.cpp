#include "advped/env.hpp"

#include <stdexcept>

namespace advped {

Observation observe(const SimState& sim, const ObservationNorms& norms) {
  Observation o(kObservationDim);
  const auto& p = sim.pedestrian;
  const auto& v = sim.vehicle;
  o << v.position.x / norms.position, v.position.y / norms.position,
      p.position.x / norms.position, p.position.y / norms.position, v.speed / norms.speed,
      p.speed / norms.speed, v.heading / norms.angle, p.heading / norms.angle;
  return o;
}

PedestrianEnv::PedestrianEnv(WorldConfig world, RewardDesign design, RewardOptions reward_opts,
                             ObservationNorms norms)
    : world_(world), design_(design), reward_opts_(reward_opts), norms_(norms) {
  world_.validate();
}

Observation PedestrianEnv::reset(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> x(world_.ped_start_x_min, world_.ped_start_x_max);
  return reset_at({x(rng), world_.ped_start_y});
}

Observation PedestrianEnv::reset_at(Vec2 ped_start) {
  if (!ped_start.finite()) throw std::invalid_argument("reset_at: start must be finite");
  sim_ = SimState{};
  sim_.pedestrian.position = ped_start;
  sim_.pedestrian.speed = world_.ped_speed;
  sim_.pedestrian.heading = std::numbers::pi / 2.0;
  sim_.vehicle.position = world_.veh_start;
  sim_.vehicle.speed = world_.veh_speed_init;
  sim_.vehicle.heading = 0.0;
  prev_dist_ = distance(sim_.pedestrian, sim_.vehicle);
  done_ = false;
  return observe(sim_, norms_);
}

StepOutcome PedestrianEnv::step(double action) {
  if (done_) throw std::logic_error("PedestrianEnv::step called on a finished episode");

  const double ped_speed_pre = sim_.pedestrian.speed;
  const double veh_speed_pre = sim_.vehicle.speed;

  const PedestrianStep ped = step_pedestrian(sim_.pedestrian, action, world_);
  const double decel = brake_controller(ped.state, sim_.vehicle, world_);
  sim_.pedestrian = ped.state;
  sim_.vehicle = step_vehicle(sim_.vehicle, decel, world_);
  sim_.step_index += 1;
  sim_.elapsed = static_cast<double>(sim_.step_index) * world_.dt;

  StepOutcome out;
  StepInfo& info = out.info;
  info.action_clamped = ped.clamped;
  info.braking = decel > 0.0;
  info.collision = evaluate_collision(sim_.pedestrian, sim_.vehicle, ped_speed_pre, veh_speed_pre, world_);
  info.collided = info.collision.collided;
  info.momentum_2d = info.collision.momentum_change_2d;
  info.momentum_1d = info.collision.momentum_change_1d;
  info.distance = distance(sim_.pedestrian, sim_.vehicle);
  info.kind = classify(prev_dist_, info.distance, info.collided, reward_opts_);

  if (design_ == RewardDesign::BaselineSignal) {
    out.reward = reward_baseline(info.kind, reward_opts_);
  } else {
    out.reward = reward_momentum(info.kind, info.distance, world_.mass_ped, world_.mass_veh,
                                 ped_speed_pre, veh_speed_pre, reward_opts_);
  }

  info.timeout = !info.collided && sim_.step_index >= world_.max_steps;
  out.done = info.collided || sim_.step_index >= world_.max_steps;
  info.state = sim_;
  prev_dist_ = info.distance;
  done_ = out.done;
  out.observation = observe(sim_, norms_);
  return out;
}

}  // namespace advped
