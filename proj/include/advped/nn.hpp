#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace advped {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class OutputActivation { Linear, ScaledTanh };

/// Dense feed-forward network: ReLU hidden layers, linear or scaled-tanh
/// output. weights[i] has shape (layer_dims[i+1], layer_dims[i]).
struct Mlp {
  std::vector<int> layer_dims;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  OutputActivation output_activation = OutputActivation::Linear;
  double output_scale = 1.0;  // applied after tanh

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  std::size_t num_layers() const { return weights.size(); }
  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Per-layer gradients, or any other parameter-shaped quantity.
struct ParamSet {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static ParamSet zeros_like(const Mlp& net);
  double squared_norm() const;
  bool all_finite() const;
};

/// Uniform Glorot weights, zero biases. Deterministic for a given seed.
/// A positive `output_layer_bound` replaces the Glorot bound of the last
/// layer (small output layers start the policy near zero).
/// Throws std::invalid_argument for fewer than two layers or non-positive widths.
Mlp init_mlp(const std::vector<int>& layer_dims, OutputActivation output_activation,
             std::uint64_t seed, double output_scale = 1.0, double output_layer_bound = 0.0);

Vector forward(const Mlp& net, const Vector& input);

/// Activations kept from a batched forward pass (one sample per column).
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activations per layer
  std::vector<Matrix> post;  // activations per layer; post.back() is the output
  const Matrix& output() const { return post.back(); }
};

ForwardCache forward_batch(const Mlp& net, const Matrix& inputs);

struct Backward {
  ParamSet grads;      // summed over the batch
  Matrix input_grad;   // d(objective)/d(input), one column per sample
};

/// Reverse-mode pass for a batch. `output_grad` holds d(objective)/d(output)
/// per sample. Parameter gradients are skipped when `want_params` is false.
/// `pre_output_grad`, when given, is an extra gradient with respect to the
/// last layer's pre-activation (before tanh), added to the chained one.
Backward backward(const Mlp& net, const ForwardCache& cache, const Matrix& output_grad,
                  bool want_params = true, bool want_input = true,
                  const Matrix* pre_output_grad = nullptr);

/// Single-sample convenience wrapper.
Backward backward(const Mlp& net, const Vector& input, const Vector& output_grad);

struct AdamState {
  ParamSet m;
  ParamSet v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_net(const Mlp& net);
};

/// Bias-corrected adaptive-moment update. Returns false (and leaves the
/// network and state untouched) when any gradient is non-finite.
bool adam_step(Mlp& net, const ParamSet& grads, AdamState& state, double lr);

/// target <- tau * online + (1 - tau) * target, parameter by parameter.
void soft_update(Mlp& target, const Mlp& online, double tau);

bool same_shape(const Mlp& a, const Mlp& b);

}  // namespace advped
