#include "c2bnet/nn.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "c2bnet/kernels.hpp"
#include "c2bnet/linalg.hpp"

namespace c2bnet::nn {

namespace k = c2bnet::kernels;
using numkit::gemm_nn;
using numkit::gemm_nt;
using numkit::gemm_tn;

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("Mlp: no layers");
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l].in_dim() != layers_[l - 1].out_dim())
      throw std::invalid_argument("Mlp: layer dimensions do not chain");
  }
}

Mlp mlp_init(const std::vector<LayerSpec>& specs, Rng& rng) {
  if (specs.empty()) throw std::invalid_argument("mlp_init: no layer specs");
  std::vector<Layer> layers;
  layers.reserve(specs.size());
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto& s = specs[l];
    if (s.in_dim < 1 || s.out_dim < 1)
      throw std::invalid_argument("mlp_init: layer dims must be >= 1");
    if (l > 0 && s.in_dim != specs[l - 1].out_dim)
      throw std::invalid_argument("mlp_init: layer dimensions do not chain");
    Layer layer;
    layer.weights = Matrix(s.out_dim, s.in_dim);
    // Kaiming-uniform fan-in bound for weights and biases; nonzero bias init
    // keeps the ReLU kink hyperplanes off the origin
    const double bound = 1.0 / std::sqrt(static_cast<double>(s.in_dim));
    for (std::size_t i = 0; i < s.out_dim; ++i)
      for (std::size_t j = 0; j < s.in_dim; ++j)
        layer.weights(i, j) = rng.uniform(-bound, bound);
    layer.has_bias = s.has_bias;
    if (s.has_bias) {
      layer.bias.resize(s.out_dim);
      for (double& b : layer.bias) b = rng.uniform(-3.0 * bound, 3.0 * bound);
    }
    layer.activation = s.activation;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

Matrix mlp_forward(const Mlp& net, const Matrix& X, ForwardCache& cache) {
  if (X.cols() != net.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  const auto& kt = k::table();
  const std::size_t L = net.layers().size();
  cache.input = X;
  cache.pre.assign(L, Matrix());
  cache.post.assign(L, Matrix());
  cache.net = &net;

  const Matrix* current = &X;
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layers()[l];
    Matrix z(current->rows(), layer.out_dim());
    gemm_nt(*current, layer.weights, z);
    if (layer.has_bias) {
      for (std::size_t i = 0; i < z.rows(); ++i)
        kt.axpy(z.cols(), 1.0, layer.bias.data(), z.row(i));
    }
    cache.pre[l] = z;
    if (layer.activation == Activation::relu) {
      Matrix a(z.rows(), z.cols());
      kt.relu(z.size(), z.data(), a.data());
      cache.post[l] = std::move(a);
    } else {
      cache.post[l] = std::move(z);
    }
    if (!cache.post[l].all_finite()) {
      std::ostringstream os;
      os << "mlp_forward: non-finite output at layer " << l;
      throw std::runtime_error(os.str());
    }
    current = &cache.post[l];
  }
  return cache.post.back();
}

Matrix mlp_forward(const Mlp& net, const Matrix& X) {
  ForwardCache cache;
  return mlp_forward(net, X, cache);
}

Gradients mlp_backward(const Mlp& net, const ForwardCache& cache,
                       const Matrix& dLdY) {
  if (cache.net != &net || cache.pre.size() != net.layers().size())
    throw std::invalid_argument("mlp_backward: cache does not match this net");
  const auto& kt = k::table();
  const std::size_t L = net.layers().size();
  if (dLdY.rows() != cache.input.rows() || dLdY.cols() != net.output_dim())
    throw std::invalid_argument("mlp_backward: dLdY shape mismatch");

  Gradients g;
  g.d_weights.assign(L, Matrix());
  g.d_bias.assign(L, {});

  Matrix delta = dLdY; // dL/d(post-activation of layer l)
  for (std::size_t l = L; l-- > 0;) {
    const Layer& layer = net.layers()[l];
    Matrix dz;
    if (layer.activation == Activation::relu) {
      dz = Matrix(delta.rows(), delta.cols());
      kt.relu_mask_mul(delta.size(), cache.pre[l].data(), delta.data(),
                       dz.data());
    } else {
      dz = std::move(delta);
    }

    const Matrix& layer_in = (l == 0) ? cache.input : cache.post[l - 1];
    g.d_weights[l] = Matrix(layer.out_dim(), layer.in_dim());
    gemm_tn(dz, layer_in, g.d_weights[l]);
    if (layer.has_bias) {
      g.d_bias[l].assign(layer.out_dim(), 0.0);
      for (std::size_t i = 0; i < dz.rows(); ++i)
        kt.axpy(dz.cols(), 1.0, dz.row(i), g.d_bias[l].data());
    }
    if (l > 0) {
      delta = Matrix(dz.rows(), layer.in_dim());
      gemm_nn(dz, layer.weights, delta);
    }
  }
  return g;
}

AdamState adam_state_for(const Mlp& net, double beta1, double beta2,
                         double eps) {
  AdamState st;
  st.beta1 = beta1;
  st.beta2 = beta2;
  st.eps = eps;
  for (const Layer& layer : net.layers()) {
    st.m_weights.emplace_back(layer.out_dim(), layer.in_dim());
    st.v_weights.emplace_back(layer.out_dim(), layer.in_dim());
    st.m_bias.emplace_back(layer.bias.size(), 0.0);
    st.v_bias.emplace_back(layer.bias.size(), 0.0);
  }
  return st;
}

void adam_step(Mlp& net, const Gradients& grads, AdamState& state, double lr,
               const std::optional<std::vector<bool>>& trainable) {
  const std::size_t L = net.layers().size();
  if (grads.d_weights.size() != L || state.m_weights.size() != L)
    throw std::invalid_argument("adam_step: shape mismatch");
  if (trainable && trainable->size() != L)
    throw std::invalid_argument("adam_step: mask length mismatch");

  for (std::size_t l = 0; l < L; ++l) {
    if (trainable && !(*trainable)[l]) continue;
    if (!grads.d_weights[l].all_finite())
      throw std::invalid_argument("adam_step: non-finite gradient");
    for (double v : grads.d_bias[l])
      if (!std::isfinite(v))
        throw std::invalid_argument("adam_step: non-finite gradient");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  k::AdamParams p;
  p.beta1 = state.beta1;
  p.beta2 = state.beta2;
  p.eps = state.eps;
  p.lr = lr;
  p.bias_correction1 = 1.0 / (1.0 - std::pow(state.beta1, t));
  p.bias_correction2 = 1.0 / (1.0 - std::pow(state.beta2, t));

  const auto& kt = k::table();
  for (std::size_t l = 0; l < L; ++l) {
    if (trainable && !(*trainable)[l]) continue;
    Layer& layer = net.layers()[l];
    if (grads.d_weights[l].rows() != layer.out_dim() ||
        grads.d_weights[l].cols() != layer.in_dim())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    kt.adam_update(layer.weights.size(), layer.weights.data(),
                   grads.d_weights[l].data(), state.m_weights[l].data(),
                   state.v_weights[l].data(), p);
    if (layer.has_bias) {
      if (grads.d_bias[l].size() != layer.bias.size())
        throw std::invalid_argument("adam_step: bias gradient shape mismatch");
      kt.adam_update(layer.bias.size(), layer.bias.data(),
                     grads.d_bias[l].data(), state.m_bias[l].data(),
                     state.v_bias[l].data(), p);
    }
  }
}

std::size_t count_params(const Mlp& net) {
  std::size_t total = 0;
  for (const Layer& layer : net.layers()) {
    total += layer.in_dim() * layer.out_dim();
    if (layer.has_bias) total += layer.out_dim();
  }
  return total;
}

namespace {

// flat parameter view for the finite-difference sweep
std::vector<double*> param_slots(Mlp& net) {
  std::vector<double*> slots;
  for (Layer& layer : net.layers()) {
    for (std::size_t i = 0; i < layer.weights.size(); ++i)
      slots.push_back(layer.weights.data() + i);
    for (double& b : layer.bias) slots.push_back(&b);
  }
  return slots;
}

std::vector<double> grad_flat(const Gradients& g) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
    const auto& w = g.d_weights[l];
    flat.insert(flat.end(), w.data(), w.data() + w.size());
    flat.insert(flat.end(), g.d_bias[l].begin(), g.d_bias[l].end());
  }
  return flat;
}

} // namespace

double finite_diff_grad_check(
    Mlp& net, const Matrix& X,
    const std::function<double(const Matrix&)>& loss_value,
    const std::function<Matrix(const Matrix&)>& loss_grad) {
  ForwardCache cache;
  const Matrix Y = mlp_forward(net, X, cache);
  const Gradients g = mlp_backward(net, cache, loss_grad(Y));
  const std::vector<double> analytic = grad_flat(g);

  const double h = 1e-6;
  auto slots = param_slots(net);
  if (slots.size() != analytic.size())
    throw std::runtime_error("finite_diff_grad_check: parameter count mismatch");

  double max_rel = 0.0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + h;
    const double lp = loss_value(mlp_forward(net, X));
    *slots[i] = saved - h;
    const double lm = loss_value(mlp_forward(net, X));
    *slots[i] = saved;
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::abs(analytic[i] - numeric) / denom);
  }
  return max_rel;
}

} // namespace c2bnet::nn
