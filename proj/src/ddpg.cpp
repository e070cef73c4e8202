#include "advped/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "advped/rng.hpp"
#include "advped/sim.hpp"

namespace advped {

ReplayBuffer::ReplayBuffer(int state_dim, std::size_t capacity)
    : state_dim_(state_dim), capacity_(capacity) {
  if (state_dim <= 0) throw std::invalid_argument("ReplayBuffer: state_dim must be > 0");
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  const auto cap = static_cast<Eigen::Index>(capacity);
  states_.resize(state_dim, cap);
  next_states_.resize(state_dim, cap);
  actions_.resize(cap);
  rewards_.resize(cap);
  dones_.resize(cap);
}

void ReplayBuffer::push(const Experience& e) {
  if (e.state.size() != state_dim_ || e.next_state.size() != state_dim_) {
    throw std::invalid_argument("ReplayBuffer::push: state dimension mismatch");
  }
  const auto slot = static_cast<Eigen::Index>(cursor_);
  states_.col(slot) = e.state;
  next_states_.col(slot) = e.next_state;
  actions_(slot) = e.action;
  rewards_(slot) = e.reward;
  dones_(slot) = e.done ? 1.0 : 0.0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Experience ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer::at");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  const auto slot = static_cast<Eigen::Index>((oldest + i) % capacity_);
  return Experience{states_.col(slot), actions_(slot), rewards_(slot), next_states_.col(slot),
                    dones_(slot) != 0.0};
}

std::optional<Batch> ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  if (!ready(batch_size)) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  Batch b;
  const auto n = static_cast<Eigen::Index>(batch_size);
  b.states.resize(state_dim_, n);
  b.next_states.resize(state_dim_, n);
  b.actions.resize(1, n);
  b.rewards.resize(n);
  b.dones.resize(n);
  b.slots.resize(batch_size);
  for (Eigen::Index j = 0; j < n; ++j) {
    const std::size_t s = pick(rng);
    const auto slot = static_cast<Eigen::Index>(s);
    b.slots[static_cast<std::size_t>(j)] = s;
    b.states.col(j) = states_.col(slot);
    b.next_states.col(j) = next_states_.col(slot);
    b.actions(0, j) = actions_(slot);
    b.rewards(j) = rewards_(slot);
    b.dones(j) = dones_(slot);
  }
  return b;
}

void DdpgConfig::validate() const {
  auto fin = [](double v) { return std::isfinite(v); };
  if (!fin(gamma) || gamma < 0.0 || gamma > 1.0) throw ConfigError("ddpg.gamma", "must be in [0, 1]");
  if (!fin(tau) || tau < 0.0 || tau > 1.0) throw ConfigError("ddpg.tau", "must be in [0, 1]");
  if (!fin(lr_actor) || lr_actor <= 0.0) throw ConfigError("ddpg.lr_actor", "must be > 0");
  if (!fin(lr_critic) || lr_critic <= 0.0) throw ConfigError("ddpg.lr_critic", "must be > 0");
  if (buffer_capacity < 1) throw ConfigError("ddpg.buffer_capacity", "must be >= 1");
  if (batch_size < 1 || batch_size > buffer_capacity) {
    throw ConfigError("ddpg.batch_size", "must be in [1, buffer_capacity]");
  }
  if (!fin(noise_sigma) || noise_sigma < 0.0) throw ConfigError("ddpg.noise_sigma", "must be >= 0");
  if (!fin(noise_decay) || noise_decay <= 0.0 || noise_decay > 1.0) {
    throw ConfigError("ddpg.noise_decay", "must be in (0, 1]");
  }
  if (!fin(output_layer_init) || output_layer_init < 0.0) {
    throw ConfigError("ddpg.output_layer_init", "must be >= 0");
  }
  if (!fin(reward_scale) || reward_scale <= 0.0) throw ConfigError("ddpg.reward_scale", "must be > 0");
  if (!fin(preactivation_penalty) || preactivation_penalty < 0.0) {
    throw ConfigError("ddpg.preactivation_penalty", "must be >= 0");
  }
  if (warmup_steps < 0) throw ConfigError("ddpg.warmup_steps", "must be >= 0");
  if (hidden_layers.empty()) throw ConfigError("ddpg.hidden_layers", "must not be empty");
  for (int h : hidden_layers) {
    if (h < 1) throw ConfigError("ddpg.hidden_layers", "widths must be >= 1");
  }
  if (train_every < 1) throw ConfigError("ddpg.train_every", "must be >= 1");
  if (gradient_steps < 0) throw ConfigError("ddpg.gradient_steps", "must be >= 0");
}

namespace {

DdpgConfig validated(DdpgConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

std::vector<int> actor_dims(int state_dim, const DdpgConfig& cfg) {
  std::vector<int> dims{state_dim};
  dims.insert(dims.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  dims.push_back(1);
  return dims;
}

std::vector<int> critic_dims(int state_dim, const DdpgConfig& cfg) {
  return actor_dims(state_dim + 1, cfg);
}

DdpgAgent::DdpgAgent(int state_dim_, double action_bound_, DdpgConfig cfg, std::uint64_t seed)
    : state_dim(state_dim_),
      action_bound(action_bound_),
      config(validated(std::move(cfg))),
      actor(init_mlp(actor_dims(state_dim_, config), OutputActivation::ScaledTanh,
                     derive_seed(seed, 1), action_bound_, config.output_layer_init)),
      critic(init_mlp(critic_dims(state_dim_, config), OutputActivation::Linear,
                      derive_seed(seed, 2), 1.0, config.output_layer_init)),
      target_actor(actor),
      target_critic(critic),
      actor_opt(AdamState::for_net(actor)),
      critic_opt(AdamState::for_net(critic)),
      buffer(state_dim_, static_cast<std::size_t>(config.buffer_capacity)),
      noise_rng(derive_seed(seed, 3)),
      sample_rng(derive_seed(seed, 4)) {}

double DdpgAgent::noise_sigma() const {
  return config.noise_sigma * std::pow(config.noise_decay, static_cast<double>(episode));
}

double DdpgAgent::policy(const Vector& observation) const {
  return forward(actor, observation)(0);
}

double DdpgAgent::select_action(const Vector& observation, bool explore) {
  double a = policy(observation);
  if (explore) {
    const double sigma = noise_sigma();
    if (sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, sigma);
      a += noise(noise_rng);
    }
  }
  return std::clamp(a, -action_bound, action_bound);
}

void DdpgAgent::remember(const Experience& e) {
  buffer.push(e);
  ++env_steps;
}

bool DdpgAgent::ready_to_learn() const {
  return env_steps >= config.warmup_steps &&
         buffer.ready(static_cast<std::size_t>(config.batch_size));
}

namespace {

Matrix stack_state_action(const Matrix& states, const Matrix& actions) {
  Matrix in(states.rows() + 1, states.cols());
  in.topRows(states.rows()) = states;
  in.bottomRows(1) = actions;
  return in;
}

}  // namespace

Vector critic_targets(const DdpgAgent& agent, const Batch& batch) {
  const ForwardCache next_actions = forward_batch(agent.target_actor, batch.next_states);
  const ForwardCache next_q =
      forward_batch(agent.target_critic, stack_state_action(batch.next_states, next_actions.output()));
  const Vector bootstrap = next_q.output().row(0).transpose();
  return agent.config.reward_scale * batch.rewards.array() +
         agent.config.gamma * (1.0 - batch.dones.array()) * bootstrap.array();
}

TrainMetrics DdpgAgent::train_step() {
  TrainMetrics m;
  auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), sample_rng);
  if (!batch) {
    m.skipped = true;
    return m;
  }
  const double n = static_cast<double>(batch->size());

  // Critic regression toward the Bellman targets.
  const Vector y = critic_targets(*this, *batch);
  const ForwardCache q_cache = forward_batch(critic, stack_state_action(batch->states, batch->actions));
  const Eigen::RowVectorXd diff = q_cache.output().row(0) - y.transpose();
  m.critic_loss = diff.squaredNorm() / n;
  if (!std::isfinite(m.critic_loss)) {
    spdlog::warn("train_step: non-finite critic loss at update {}, step skipped", updates);
    m.skipped = true;
    return m;
  }
  const Backward critic_bw = backward(critic, q_cache, (2.0 / n) * diff, true, false);
  m.critic_grad_norm = std::sqrt(critic_bw.grads.squared_norm());
  adam_step(critic, critic_bw.grads, critic_opt, config.lr_critic);

  // Actor ascent on Q(s, mu(s)) through dQ/da.
  const ForwardCache a_cache = forward_batch(actor, batch->states);
  const ForwardCache qa_cache = forward_batch(critic, stack_state_action(batch->states, a_cache.output()));
  m.actor_objective = qa_cache.output().mean();
  const Matrix ascent = Matrix::Constant(1, qa_cache.output().cols(), -1.0 / n);
  const Backward dq = backward(critic, qa_cache, ascent, false, true);
  const Matrix pre_grad = (2.0 * config.preactivation_penalty / n) * a_cache.pre.back();
  const Backward actor_bw = backward(actor, a_cache, dq.input_grad.bottomRows(1), true, false,
                                     config.preactivation_penalty > 0.0 ? &pre_grad : nullptr);
  m.actor_grad_norm = std::sqrt(actor_bw.grads.squared_norm());
  adam_step(actor, actor_bw.grads, actor_opt, config.lr_actor);

  soft_update(target_actor, actor, config.tau);
  soft_update(target_critic, critic, config.tau);
  ++updates;
  return m;
}

}  // namespace advped
