#include "advped/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace advped {

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    n += static_cast<std::size_t>(weights[i].size() + biases[i].size());
  }
  return n;
}

bool Mlp::all_finite() const {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

ParamSet ParamSet::zeros_like(const Mlp& net) {
  ParamSet p;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    p.weights.push_back(Matrix::Zero(net.weights[i].rows(), net.weights[i].cols()));
    p.biases.push_back(Vector::Zero(net.biases[i].size()));
  }
  return p;
}

double ParamSet::squared_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s += weights[i].squaredNorm() + biases[i].squaredNorm();
  }
  return s;
}

bool ParamSet::all_finite() const {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!weights[i].allFinite() || !biases[i].allFinite()) return false;
  }
  return true;
}

Mlp init_mlp(const std::vector<int>& layer_dims, OutputActivation output_activation,
             std::uint64_t seed, double output_scale, double output_layer_bound) {
  if (layer_dims.size() < 2) throw std::invalid_argument("init_mlp: need at least two layers");
  for (int d : layer_dims) {
    if (d <= 0) throw std::invalid_argument("init_mlp: layer widths must be positive");
  }
  Mlp net;
  net.layer_dims = layer_dims;
  net.output_activation = output_activation;
  net.output_scale = output_scale;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
    const int fan_in = layer_dims[i];
    const int fan_out = layer_dims[i + 1];
    const bool last = i + 2 == layer_dims.size();
    const double bound = last && output_layer_bound > 0.0
                             ? output_layer_bound
                             : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_out, fan_in);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = dist(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

ForwardCache forward_batch(const Mlp& net, const Matrix& inputs) {
  if (inputs.rows() != net.input_dim()) {
    throw std::invalid_argument("forward: input has " + std::to_string(inputs.rows()) +
                                " rows, network expects " + std::to_string(net.input_dim()));
  }
  ForwardCache cache;
  cache.input = inputs;
  const std::size_t layers = net.num_layers();
  cache.pre.resize(layers);
  cache.post.resize(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const Matrix& x = i == 0 ? cache.input : cache.post[i - 1];
    Matrix& z = cache.pre[i];
    z.noalias() = net.weights[i] * x;
    z.colwise() += net.biases[i];
    if (i + 1 < layers) {
      cache.post[i] = z.cwiseMax(0.0);
    } else if (net.output_activation == OutputActivation::ScaledTanh) {
      cache.post[i] = net.output_scale * z.array().tanh();
    } else {
      cache.post[i] = z;
    }
  }
  return cache;
}

Vector forward(const Mlp& net, const Vector& input) {
  if (input.size() != net.input_dim()) {
    throw std::invalid_argument("forward: input length " + std::to_string(input.size()) +
                                " does not match network input " +
                                std::to_string(net.input_dim()));
  }
  Vector x = input;
  const std::size_t layers = net.num_layers();
  for (std::size_t i = 0; i < layers; ++i) {
    Vector z = net.weights[i] * x + net.biases[i];
    if (i + 1 < layers) {
      x = z.cwiseMax(0.0);
    } else if (net.output_activation == OutputActivation::ScaledTanh) {
      x = net.output_scale * z.array().tanh();
    } else {
      x = std::move(z);
    }
  }
  return x;
}

Backward backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
                  bool want_params, bool want_input, const Matrix* pre_output_grad) {
  const std::size_t layers = net.num_layers();
  const Matrix& out = cache.output();
  if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
    throw std::invalid_argument("backward: output gradient shape mismatch");
  }
  Backward result;
  if (want_params) {
    result.grads.weights.resize(layers);
    result.grads.biases.resize(layers);
  }

  Matrix delta;
  if (net.output_activation == OutputActivation::ScaledTanh) {
    const auto t = cache.pre.back().array().tanh();
    delta = (output_grad.array() * net.output_scale * (1.0 - t * t)).matrix();
  } else {
    delta = output_grad;
  }
  if (pre_output_grad) {
    if (pre_output_grad->rows() != out.rows() || pre_output_grad->cols() != out.cols()) {
      throw std::invalid_argument("backward: pre-activation gradient shape mismatch");
    }
    delta += *pre_output_grad;
  }

  for (std::size_t k = layers; k-- > 0;) {
    const Matrix& x = k == 0 ? cache.input : cache.post[k - 1];
    if (want_params) {
      result.grads.weights[k].noalias() = delta * x.transpose();
      result.grads.biases[k] = delta.rowwise().sum();
    }
    if (k == 0) {
      if (want_input) result.input_grad.noalias() = net.weights[0].transpose() * delta;
      break;
    }
    Matrix prev;
    prev.noalias() = net.weights[k].transpose() * delta;
    delta = (prev.array() * (cache.pre[k - 1].array() > 0.0).cast<double>()).matrix();
  }
  return result;
}

Backward backward(const Mlp& net, const Vector& input, const Vector& output_grad) {
  const ForwardCache cache = forward_batch(net, input);
  if (output_grad.size() != net.output_dim()) {
    throw std::invalid_argument("backward: output gradient length mismatch");
  }
  return backward(net, cache, output_grad, true, true);
}

AdamState AdamState::for_net(const Mlp& net) {
  AdamState s;
  s.m = ParamSet::zeros_like(net);
  s.v = ParamSet::zeros_like(net);
  return s;
}

namespace {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, double b1, double b2, double step_size,
                 double eps_hat) {
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
  param.array() -= step_size * m.array() / (v.array().sqrt() + eps_hat);
}

}  // namespace

bool adam_step(Mlp& net, const ParamSet& grads, AdamState& state, double lr) {
  if (grads.weights.size() != net.weights.size()) {
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  }
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    if (grads.weights[i].rows() != net.weights[i].rows() ||
        grads.weights[i].cols() != net.weights[i].cols() ||
        grads.biases[i].size() != net.biases[i].size()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                  std::to_string(i));
    }
  }
  if (!grads.all_finite()) {
    spdlog::warn("adam_step: non-finite gradient, update skipped (step {})", state.step);
    return false;
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  // lr * m_hat / (sqrt(v_hat) + eps), folded into one scale and a rescaled eps.
  const double step_size = lr * std::sqrt(bc2) / bc1;
  const double eps_hat = state.eps * std::sqrt(bc2);
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    adam_update(net.weights[i], grads.weights[i], state.m.weights[i], state.v.weights[i],
                state.beta1, state.beta2, step_size, eps_hat);
    adam_update(net.biases[i], grads.biases[i], state.m.biases[i], state.v.biases[i],
                state.beta1, state.beta2, step_size, eps_hat);
  }
  return true;
}

bool same_shape(const Mlp& a, const Mlp& b) {
  return a.layer_dims == b.layer_dims && a.output_activation == b.output_activation;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!same_shape(target, online)) throw std::invalid_argument("soft_update: shape mismatch");
  if (tau == 0.0) return;
  if (tau == 1.0) {
    target.weights = online.weights;
    target.biases = online.biases;
    return;
  }
  for (std::size_t i = 0; i < target.weights.size(); ++i) {
    target.weights[i] += tau * (online.weights[i] - target.weights[i]);
    target.biases[i] += tau * (online.biases[i] - target.biases[i]);
  }
}

}  // namespace advped
