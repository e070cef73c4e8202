#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "advped/nn.hpp"

namespace advped {

struct Experience {
  Vector state;
  double action = 0.0;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

/// Column-per-sample view of a sampled minibatch.
struct Batch {
  Matrix states;       // state_dim x N
  Matrix actions;      // 1 x N
  Vector rewards;      // N
  Matrix next_states;  // state_dim x N
  Vector dones;        // N, 1.0 for terminal
  std::vector<std::size_t> slots;

  std::size_t size() const { return slots.size(); }
};

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  ReplayBuffer(int state_dim, std::size_t capacity);

  void push(const Experience& e);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool ready(std::size_t batch_size) const { return batch_size > 0 && size_ >= batch_size; }

  /// i-th stored record, oldest first.
  Experience at(std::size_t i) const;

  /// Uniform sampling with replacement; nullopt while fewer than
  /// `batch_size` records are stored.
  std::optional<Batch> sample(std::size_t batch_size, std::mt19937_64& rng) const;

 private:
  int state_dim_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  Matrix states_;
  Vector actions_;
  Vector rewards_;
  Matrix next_states_;
  Vector dones_;
};

struct DdpgConfig {
  double gamma = 0.9;
  double tau = 0.005;
  double lr_actor = 0.001;
  double lr_critic = 0.002;
  // Desk-scale defaults: configs/full_scale.json restores the full-size
  // [512, 256] layers, batch 1000 and one update per step.
  int batch_size = 256;
  int buffer_capacity = 10000;
  double noise_sigma = 0.1 * std::numbers::pi / 2.0;  // rad
  double noise_decay = 0.999;                          // per episode
  int warmup_steps = 1000;
  std::vector<int> hidden_layers{64, 64};
  // Uniform bound of the actor and critic output layers; 0 keeps Glorot.
  double output_layer_init = 3e-3;
  // Gradient steps are taken in rounds: every `train_every` environment
  // steps, run `gradient_steps` updates.
  int train_every = 4;
  int gradient_steps = 1;
  bool bootstrap_on_timeout = false;
  // Rewards are multiplied by this before entering the Bellman target.
  // A positive factor leaves the greedy policy unchanged and keeps the
  // critic's regression targets near unit scale.
  double reward_scale = 0.01;
  // Weight of mean(z^2) on the actor's pre-tanh output z. Without it a
  // saturated actor gets no gradient back from the critic.
  double preactivation_penalty = 0.1;

  void validate() const;
};

struct TrainMetrics {
  bool skipped = false;
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) over the batch
  double critic_grad_norm = 0.0;
  double actor_grad_norm = 0.0;
};

/// Actor, critic, their slowly-blended targets, optimizer state, replay
/// memory and the random streams for noise and sampling.
struct DdpgAgent {
  DdpgAgent(int state_dim, double action_bound, DdpgConfig cfg, std::uint64_t seed);

  int state_dim;
  double action_bound;
  DdpgConfig config;

  Mlp actor;
  Mlp critic;  // input is [state; action]
  Mlp target_actor;
  Mlp target_critic;
  AdamState actor_opt;
  AdamState critic_opt;
  ReplayBuffer buffer;

  std::mt19937_64 noise_rng;
  std::mt19937_64 sample_rng;
  std::int64_t episode = 0;     // completed training episodes
  std::int64_t env_steps = 0;   // transitions pushed
  std::int64_t updates = 0;     // gradient steps taken

  /// sigma0 * decay^episode.
  double noise_sigma() const;

  /// Actor output, plus Gaussian noise when exploring, clipped to the bound.
  double select_action(const Vector& observation, bool explore);

  /// Deterministic actor output; safe to call concurrently.
  double policy(const Vector& observation) const;

  void remember(const Experience& e);

  /// True once warmup is over and the buffer holds a full batch.
  bool ready_to_learn() const;

  /// One critic regression step, one actor ascent step, then target blending.
  TrainMetrics train_step();

  void end_episode() { ++episode; }
};

/// Bellman targets r + gamma * (1 - done) * Q'(s', mu'(s')).
Vector critic_targets(const DdpgAgent& agent, const Batch& batch);

std::vector<int> actor_dims(int state_dim, const DdpgConfig& cfg);
std::vector<int> critic_dims(int state_dim, const DdpgConfig& cfg);

}  // namespace advped
