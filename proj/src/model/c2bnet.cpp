#include "c2bnet/model.hpp"

#include <cmath>
#include <stdexcept>

#include "c2bnet/kernels.hpp"

namespace c2bnet::model {

namespace k = c2bnet::kernels;

Normalizer Normalizer::identity(std::size_t dim) {
  Normalizer n;
  n.mean.assign(dim, 0.0);
  n.std_dev.assign(dim, 1.0);
  return n;
}

Normalizer Normalizer::fit(const Matrix& X) {
  const std::size_t n = X.rows(), d = X.cols();
  if (n == 0) throw std::invalid_argument("Normalizer::fit: empty batch");
  Normalizer norm;
  norm.mean.assign(d, 0.0);
  norm.std_dev.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) norm.mean[j] += X(i, j);
  for (double& m : norm.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = X(i, j) - norm.mean[j];
      norm.std_dev[j] += c * c;
    }
  for (double& s : norm.std_dev) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 0.0)) s = 1.0;
  }
  return norm;
}

std::vector<double> Normalizer::apply(const std::vector<double>& u) const {
  if (u.size() != mean.size())
    throw std::invalid_argument("Normalizer::apply: dimension mismatch");
  std::vector<double> out(u.size());
  for (std::size_t j = 0; j < u.size(); ++j)
    out[j] = (u[j] - mean[j]) / std_dev[j];
  return out;
}

Matrix Normalizer::apply(const Matrix& X) const {
  if (X.cols() != mean.size())
    throw std::invalid_argument("Normalizer::apply: dimension mismatch");
  Matrix out(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.rows(); ++i)
    for (std::size_t j = 0; j < X.cols(); ++j)
      out(i, j) = (X(i, j) - mean[j]) / std_dev[j];
  return out;
}

C2BNet::C2BNet(nn::Mlp net, Normalizer norm, Grid input_grid, Grid output_grid)
    : net_(std::move(net)),
      norm_(std::move(norm)),
      input_grid_(input_grid),
      output_grid_(output_grid) {
  const auto& layers = net_.layers();
  if (layers.size() < 2)
    throw std::invalid_argument("C2BNet: needs at least latent + basis layers");
  const nn::Layer& basis = layers.back();
  if (basis.has_bias || basis.activation != nn::Activation::identity)
    throw std::invalid_argument("C2BNet: basis layer must be linear and bias-free");
  if (input_grid_.size() != net_.input_dim() ||
      output_grid_.size() != net_.output_dim())
    throw std::invalid_argument("C2BNet: grid sizes do not match the network");
  if (norm_.mean.size() != net_.input_dim())
    throw std::invalid_argument("C2BNet: normalizer dimension mismatch");
}

std::size_t C2BNet::d_low() const {
  return net_.layers().back().in_dim();
}

const Matrix& C2BNet::basis() const { return net_.layers().back().weights; }

Matrix C2BNet::forward_batch(const Matrix& X_raw) const {
  return nn::mlp_forward(net_, norm_.apply(X_raw));
}

std::vector<double> C2BNet::forward(const std::vector<double>& u) const {
  if (u.size() != input_dim())
    throw std::invalid_argument("C2BNet::forward: input dimension mismatch");
  Matrix X(1, u.size());
  X.set_row(0, u);
  return forward_batch(X).row_copy(0);
}

Matrix C2BNet::latent_batch(const Matrix& X_raw) const {
  nn::ForwardCache cache;
  nn::mlp_forward(net_, norm_.apply(X_raw), cache);
  return cache.post[net_.layers().size() - 2];
}

std::vector<double> C2BNet::latent(const std::vector<double>& u) const {
  Matrix X(1, u.size());
  X.set_row(0, u);
  return latent_batch(X).row_copy(0);
}

C2BNet C2BNet::with_new_basis(Matrix basis, const Grid& new_output_grid) const {
  if (basis.cols() != d_low())
    throw std::invalid_argument("with_new_basis: latent width mismatch");
  if (basis.rows() != new_output_grid.size())
    throw std::invalid_argument("with_new_basis: grid size mismatch");
  std::vector<nn::Layer> layers = net_.layers();
  layers.back().weights = std::move(basis);
  return C2BNet(nn::Mlp(std::move(layers)), norm_, input_grid_, new_output_grid);
}

C2BNet make_c2bnet(const Grid& input_grid, const Grid& output_grid,
                   std::size_t d_low, Rng& rng,
                   const std::vector<std::size_t>& hidden) {
  const std::size_t D1 = input_grid.size();
  const std::size_t D2 = output_grid.size();
  if (d_low < 1) throw std::invalid_argument("make_c2bnet: d_low must be >= 1");

  std::vector<nn::LayerSpec> specs;
  std::size_t prev = D1;
  for (std::size_t h : hidden) {
    specs.push_back({prev, h, true, nn::Activation::relu});
    prev = h;
  }
  // the latent carries signed basis coefficients: linear, like any final
  // layer of a ReLU network; the basis layer after it is linear and bias-free
  specs.push_back({prev, d_low, true, nn::Activation::identity});
  specs.push_back({d_low, D2, false, nn::Activation::identity});

  nn::Mlp net = nn::mlp_init(specs, rng);
  return C2BNet(std::move(net), Normalizer::identity(D1), input_grid,
                output_grid);
}

double quadrature_loss(const Matrix& preds, const Matrix& targets,
                       const Quadrature& q) {
  if (preds.rows() != targets.rows() || preds.cols() != targets.cols())
    throw std::invalid_argument("quadrature_loss: shape mismatch");
  if (preds.cols() != q.weights.size())
    throw std::invalid_argument("quadrature_loss: weight length mismatch");
  const auto& kt = k::table();
  const std::size_t n = preds.rows();
  const std::size_t D = preds.cols();
  std::vector<double> diff(D);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    kt.sub(D, preds.row(i), targets.row(i), diff.data());
    total += kt.weighted_dot(q.weights.data(), diff.data(), diff.data(), D);
  }
  return total / static_cast<double>(n);
}

Matrix quadrature_loss_grad(const Matrix& preds, const Matrix& targets,
                            const Quadrature& q) {
  if (preds.rows() != targets.rows() || preds.cols() != targets.cols())
    throw std::invalid_argument("quadrature_loss_grad: shape mismatch");
  if (preds.cols() != q.weights.size())
    throw std::invalid_argument("quadrature_loss_grad: weight length mismatch");
  const double scale = 2.0 / static_cast<double>(preds.rows());
  Matrix g(preds.rows(), preds.cols());
  for (std::size_t i = 0; i < preds.rows(); ++i)
    for (std::size_t kk = 0; kk < preds.cols(); ++kk)
      g(i, kk) = scale * q.weights[kk] * (preds(i, kk) - targets(i, kk));
  return g;
}

std::vector<bool> basis_only_mask(const C2BNet& net) {
  std::vector<bool> mask(net.net().layers().size(), false);
  mask.back() = true;
  return mask;
}

} // namespace c2bnet::model
