#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "advped/sim.hpp"
#include "oracles.hpp"

namespace advped {
namespace {

constexpr double kPi = std::numbers::pi;

PedestrianState ped_at(double x, double y, double heading = 0.0, double speed = 2.0) {
  return {{x, y}, speed, heading};
}

VehicleState veh_at(double x, double y, double speed = 7.0) { return {{x, y}, speed, 0.0}; }

TEST(StepPedestrian, StraightLine) {
  WorldConfig cfg;
  const auto s = step_pedestrian(ped_at(0, 0), 0.0, cfg).state;
  EXPECT_DOUBLE_EQ(s.position.x, 0.1);
  EXPECT_DOUBLE_EQ(s.position.y, 0.0);
  EXPECT_DOUBLE_EQ(s.speed, 2.0);
}

TEST(StepPedestrian, ReversalNeedsFullTurnBound) {
  WorldConfig cfg;
  cfg.action_bound = kPi;
  const auto step = step_pedestrian(ped_at(0, 0), kPi, cfg);
  EXPECT_FALSE(step.clamped);
  EXPECT_DOUBLE_EQ(step.state.heading, kPi);
  EXPECT_NEAR(step.state.position.x, -0.1, 1e-15);
  EXPECT_NEAR(step.state.position.y, 0.0, 1e-15);
}

TEST(StepPedestrian, AxisAlignedFromSidewalkStart) {
  WorldConfig cfg;
  const auto s = step_pedestrian(ped_at(50, -5, kPi / 2), 0.0, cfg).state;
  EXPECT_NEAR(s.position.x, 50.0, 1e-14);
  EXPECT_DOUBLE_EQ(s.position.y, -4.9);
}

TEST(StepPedestrian, ClampsAndFlagsOutOfBound) {
  WorldConfig cfg;
  auto step = step_pedestrian(ped_at(0, 0), 3.0, cfg);
  EXPECT_TRUE(step.clamped);
  EXPECT_DOUBLE_EQ(step.state.heading, cfg.action_bound);
  step = step_pedestrian(ped_at(0, 0), -3.0, cfg);
  EXPECT_TRUE(step.clamped);
  EXPECT_DOUBLE_EQ(step.state.heading, -cfg.action_bound);
  step = step_pedestrian(ped_at(0, 0), std::nan(""), cfg);
  EXPECT_TRUE(step.clamped);
  EXPECT_TRUE(step.state.position.finite());
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(kPi / 2 + 4 * kPi), kPi / 2, 1e-12);
}

TEST(StepPedestrianProperty, HeadingWrapAndStepLength) {
  WorldConfig cfg;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> act(-cfg.action_bound, cfg.action_bound);
  PedestrianState s = ped_at(50, -5, kPi / 2);
  for (int i = 0; i < 20000; ++i) {
    const auto next = step_pedestrian(s, act(rng), cfg).state;
    ASSERT_GT(next.heading, -kPi);
    ASSERT_LE(next.heading, kPi);
    const double len = std::hypot(next.position.x - s.position.x, next.position.y - s.position.y);
    ASSERT_NEAR(len, cfg.ped_speed * cfg.dt, 1e-12);
    s = next;
  }
}

TEST(StepPedestrianProperty, Deterministic) {
  WorldConfig cfg;
  const auto a = step_pedestrian(ped_at(41.3, -4.2, 0.7), 0.33, cfg).state;
  const auto b = step_pedestrian(ped_at(41.3, -4.2, 0.7), 0.33, cfg).state;
  EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
}

TEST(StepVehicle, BrakingArithmetic) {
  WorldConfig cfg;
  const auto v = step_vehicle(veh_at(0, 0), cfg.brake_decel, cfg);
  EXPECT_DOUBLE_EQ(v.speed, 6.875);
  EXPECT_DOUBLE_EQ(v.position.x, 7 * 0.05 - 0.5 * 2.5 * 0.05 * 0.05);
}

TEST(StepVehicle, ConstantVelocity) {
  WorldConfig cfg;
  const auto v = step_vehicle(veh_at(0, 0), 0.0, cfg);
  EXPECT_DOUBLE_EQ(v.speed, 7.0);
  EXPECT_NEAR(v.position.x, 0.35, 1e-15);
  EXPECT_DOUBLE_EQ(v.position.y, 0.0);
}

TEST(StepVehicle, StopsWithinStep) {
  WorldConfig cfg;
  const auto v = step_vehicle(veh_at(0, 0, 0.1), 2.5, cfg);
  EXPECT_DOUBLE_EQ(v.speed, 0.0);
  EXPECT_NEAR(v.position.x, 0.002, 1e-15);
  EXPECT_NEAR(v.position.x, oracle::braking_displacement(0.1, 2.5, 0.05), 1e-9);
}

TEST(StepVehicle, MatchesFineIntegrationAcrossSpeeds) {
  WorldConfig cfg;
  for (double v0 : {0.0, 0.01, 0.05, 0.124, 0.125, 0.2, 3.0, 7.0}) {
    const auto v = step_vehicle(veh_at(0, 0, v0), 2.5, cfg);
    EXPECT_NEAR(v.position.x, oracle::braking_displacement(v0, 2.5, cfg.dt), 1e-9) << v0;
  }
}

TEST(StepVehicle, RejectsBadDecel) {
  WorldConfig cfg;
  EXPECT_THROW(step_vehicle(veh_at(0, 0), -1.0, cfg), std::invalid_argument);
  EXPECT_THROW(step_vehicle(veh_at(0, 0), std::nan(""), cfg), std::invalid_argument);
}

TEST(StepVehicleProperty, SpeedMonotoneAndStoppingDistance) {
  WorldConfig cfg;
  VehicleState v = veh_at(0, 0);
  double prev = v.speed;
  for (int i = 0; i < 200; ++i) {
    v = step_vehicle(v, cfg.brake_decel, cfg);
    ASSERT_LE(v.speed, prev);
    ASSERT_GE(v.speed, 0.0);
    prev = v.speed;
  }
  // Timestep-independent stopping distance v^2 / (2a).
  EXPECT_NEAR(v.position.x, 49.0 / 5.0, 1e-9);
}

TEST(InDriveway, ClosedBand) {
  WorldConfig cfg;
  EXPECT_FALSE(in_driveway({0, -5}, cfg));
  EXPECT_TRUE(in_driveway({0, 0}, cfg));
  EXPECT_TRUE(in_driveway({0, -3}, cfg));
  EXPECT_TRUE(in_driveway({0, 3}, cfg));
  EXPECT_FALSE(in_driveway({0, 3.0000001}, cfg));
}

TEST(Distance, Examples) {
  EXPECT_NEAR(distance(ped_at(50, -5), veh_at(0, 0)), std::sqrt(2525.0), 1e-12);
  EXPECT_NEAR(distance(ped_at(50, -5), veh_at(0, 0)), 50.2494, 1e-4);
  EXPECT_DOUBLE_EQ(distance(ped_at(1, 1), veh_at(1, 1)), 0.0);
  EXPECT_DOUBLE_EQ(distance(ped_at(3, 4), veh_at(0, 0)), 5.0);
  EXPECT_DOUBLE_EQ(distance(ped_at(3, 4), veh_at(-2, 1)), distance(ped_at(-2, 1), veh_at(3, 4)));
}

TEST(BrakeController, AlgorithmBranches) {
  WorldConfig cfg;
  EXPECT_DOUBLE_EQ(brake_controller(ped_at(9.9, 0), veh_at(0, 0), cfg), cfg.brake_decel);
  EXPECT_DOUBLE_EQ(brake_controller(ped_at(10.1, 0), veh_at(0, 0), cfg), 0.0);
  EXPECT_DOUBLE_EQ(brake_controller(ped_at(4, -3), veh_at(0, 0), cfg), cfg.brake_decel);
  EXPECT_DOUBLE_EQ(brake_controller(ped_at(3, -4), veh_at(0, 0), cfg), 0.0);  // sidewalk, 5 m
  EXPECT_DOUBLE_EQ(brake_controller(ped_at(10, 0), veh_at(0, 0), cfg), 0.0);  // strict <
}

TEST(WorldConfig, ValidationNamesKey) {
  auto expect_key = [](WorldConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL() << "expected ConfigError for " << key;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.key(), key);
    }
  };
  WorldConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt = 0;
  expect_key(c, "world.dt");
  c = {};
  c.brake_decel = -1;
  expect_key(c, "world.brake_decel");
  c = {};
  c.mass_veh = 0;
  expect_key(c, "world.mass_veh");
  c = {};
  c.driveway_y_min = 3;
  expect_key(c, "world.driveway_y_min");
  c = {};
  c.max_steps = 0;
  expect_key(c, "world.max_steps");
  c = {};
  c.ped_start_x_min = 61;
  expect_key(c, "world.ped_start_x_min");
}

}  // namespace
}  // namespace advped
