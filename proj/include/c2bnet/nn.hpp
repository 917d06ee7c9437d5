#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "c2bnet/matrix.hpp"
#include "c2bnet/rng.hpp"

namespace c2bnet::nn {

using numkit::Matrix;
using numkit::Rng;

enum class Activation { relu, identity };

struct LayerSpec {
  std::size_t in_dim;
  std::size_t out_dim;
  bool has_bias;
  Activation activation;
};

struct Layer {
  Matrix weights;            // out_dim × in_dim
  std::vector<double> bias;  // empty when has_bias is false
  bool has_bias = true;
  Activation activation = Activation::relu;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }
};

/// Feedforward network: x -> W_L·act(...act(W_1 x + b_1)...) (+ b_L).
/// The architecture is fixed at construction; only values change afterwards.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }

  bool operator==(const Mlp& other) const = default;

 private:
  std::vector<Layer> layers_;
};

struct ForwardCache {
  Matrix input;                    // batch × in_dim
  std::vector<Matrix> pre;         // pre-activation per layer
  std::vector<Matrix> post;        // post-activation per layer
  const Mlp* net = nullptr;        // cache validity check for backward
};

struct Gradients {
  std::vector<Matrix> d_weights;
  std::vector<std::vector<double>> d_bias; // empty vectors for bias-free layers
};

struct AdamState {
  std::vector<Matrix> m_weights, v_weights;
  std::vector<std::vector<double>> m_bias, v_bias;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// He-normal initialization: weights ~ N(0, 2/in_dim), biases zero.
/// Throws std::invalid_argument if consecutive dims do not chain.
Mlp mlp_init(const std::vector<LayerSpec>& specs, Rng& rng);

/// Batch forward pass; X is batch × input_dim. Throws std::runtime_error
/// naming the first layer whose output is non-finite.
Matrix mlp_forward(const Mlp& net, const Matrix& X, ForwardCache& cache);
Matrix mlp_forward(const Mlp& net, const Matrix& X); // no cache

/// Reverse-mode gradients from dL/dY. ReLU subgradient at 0 is 0.
/// Throws std::invalid_argument if the cache is not from this net.
Gradients mlp_backward(const Mlp& net, const ForwardCache& cache,
                       const Matrix& dLdY);

AdamState adam_state_for(const Mlp& net, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8);

/// One Adam step with bias correction. Layers whose mask entry is false are
/// left untouched (parameters and moments). Throws std::invalid_argument on
/// non-finite gradients or shape mismatch.
void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr,
               const std::optional<std::vector<bool>>& trainable = std::nullopt);

std::size_t count_params(const Mlp& net);

/// Max relative error between backprop and central finite differences
/// (h = 1e-6), relative to max(|a|,|b|,1e-8). `loss_value` maps predictions
/// to a scalar; `loss_grad` gives dL/dY for the analytic path.
double finite_diff_grad_check(
    Mlp& net, const Matrix& X,
    const std::function<double(const Matrix&)>& loss_value,
    const std::function<Matrix(const Matrix&)>& loss_grad);

} // namespace c2bnet::nn
