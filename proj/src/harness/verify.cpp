#include "c2bnet/verify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "c2bnet/grids.hpp"
#include "c2bnet/kernels.hpp"
#include "c2bnet/model.hpp"
#include "c2bnet/nn.hpp"
#include "c2bnet/pde.hpp"
#include "c2bnet/rng.hpp"

namespace c2bnet::harness::verify {

using grids::Grid;
using grids::NodePlacement;
using numkit::Matrix;
using numkit::Rng;

double gradient_check_batch(std::size_t num_nets, std::uint64_t seed) {
  Rng root(seed);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < num_nets; ++trial) {
    Rng rng = root.split(trial);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::size_t D1 = 2 + rng.next_u64() % 5;
      const std::size_t h1 = 4 + rng.next_u64() % 5;
      const std::size_t h2 = 4 + rng.next_u64() % 5;
      const std::size_t d_low = 1 + rng.next_u64() % 4;
      const std::size_t D2 = 2 + rng.next_u64() % 7;
      const std::size_t batch = 1 + rng.next_u64() % 3;

      const Grid in_grid =
          Grid::line1d(0.0, 1.0, D1, NodePlacement::endpoints_included);
      const Grid out_grid =
          Grid::line1d(0.0, 1.0, D2, NodePlacement::endpoints_included);
      model::C2BNet net = model::make_c2bnet(in_grid, out_grid, d_low, rng,
                                             {h1, h2});
      const grids::Quadrature q = grids::make_quadrature(out_grid);

      Matrix X(batch, D1);
      for (std::size_t i = 0; i < X.size(); ++i)
        X.data()[i] = rng.uniform(-1.5, 1.5);
      Matrix target(batch, D2);
      for (std::size_t i = 0; i < target.size(); ++i)
        target.data()[i] = rng.uniform(-1.0, 1.0);

      // resample if any pre-activation sits on a ReLU kink
      nn::ForwardCache cache;
      nn::mlp_forward(net.net(), X, cache);
      bool near_kink = false;
      for (std::size_t l = 0; l + 1 < net.net().layers().size(); ++l)
        for (std::size_t i = 0; i < cache.pre[l].size(); ++i)
          near_kink = near_kink || std::abs(cache.pre[l].data()[i]) < 1e-4;
      if (near_kink) continue;

      auto loss_value = [&](const Matrix& pred) {
        return model::quadrature_loss(pred, target, q);
      };
      auto loss_grad = [&](const Matrix& pred) {
        return model::quadrature_loss_grad(pred, target, q);
      };
      worst = std::max(
          worst, nn::finite_diff_grad_check(net.net(), X, loss_value, loss_grad));
      break;
    }
  }
  return worst;
}

namespace {

double elliptic_manufactured_error(std::size_t cells) {
  const double pi = std::numbers::pi;
  auto kappa = [](double, double) { return 1.0; };
  auto exact = [pi](double x, double y) {
    return std::sin(pi * x) * std::sin(pi * y);
  };
  auto f = [pi, exact](double x, double y) {
    return 2.0 * pi * pi * exact(x, y);
  };
  const grids::DiscreteField sol = pde::solve_elliptic(kappa, f, cells);
  double max_err = 0.0;
  for (std::size_t k = 0; k < sol.grid.size(); ++k) {
    double x, y;
    sol.grid.coord2d(k, x, y);
    max_err = std::max(max_err, std::abs(sol.values[k] - exact(x, y)));
  }
  return max_err;
}

} // namespace

EllipticOracle elliptic_manufactured_oracle() {
  EllipticOracle o;
  const double err32 = elliptic_manufactured_error(32);
  o.max_err_fine = elliptic_manufactured_error(64);
  o.observed_order = std::log2(err32 / o.max_err_fine);
  return o;
}

double heat_mode_decay_error() {
  const double pi = std::numbers::pi;
  const double T = 0.01;
  auto u0 = [pi](double x) { return std::sin(pi * x); };
  const grids::DiscreteField sol = pde::solve_heat(u0, T);
  const Grid obs = pde::default_input_grid("heat");
  const grids::DiscreteField restricted = pde::restrict_nearest(sol, obs);
  const double decay = std::exp(-pi * pi * T);
  double max_err = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double x = obs.coord1d(i);
    max_err = std::max(max_err,
                       std::abs(restricted.values[i] - decay * std::sin(pi * x)));
  }
  return max_err;
}

double heat_mode_ratio_error() {
  const double pi = std::numbers::pi;
  const double T = 0.01;
  auto u0 = [pi](double x) { return std::sin(2.0 * pi * x); };
  const grids::DiscreteField sol = pde::solve_heat(u0, T);
  // amplitude at the quarter point, where sin(2 pi x) = 1
  const std::size_t idx = sol.grid.n / 8; // x = 0.25 on [0,2]
  const double x = sol.grid.coord1d(idx);
  const double expected = std::exp(-4.0 * pi * pi * T) * std::sin(2.0 * pi * x);
  return std::abs(sol.values[idx] - expected);
}

double rte_constant_error() {
  const double c = 0.7;
  auto sigma = [](double, double) { return 0.0; };
  auto inflow = [c](double, double, std::size_t) { return c; };
  const grids::DiscreteField sol = pde::solve_rte(sigma, inflow, 16);
  double max_err = 0.0;
  for (double v : sol.values) max_err = std::max(max_err, std::abs(v - c));
  return max_err;
}

double rte_isotropic_error() {
  const double c = 0.4;
  auto sigma = [](double, double) { return 0.5; };
  auto inflow = [c](double, double, std::size_t) { return c; };
  const grids::DiscreteField sol = pde::solve_rte(sigma, inflow, 16, 1e-13);
  double max_err = 0.0;
  for (double v : sol.values) max_err = std::max(max_err, std::abs(v - c));
  return max_err;
}

double quadrature_volume_error() {
  const auto& kt = kernels::table();
  double worst = 0.0;
  {
    const Grid g = Grid::line1d(0.0, 2.0, 64, NodePlacement::endpoints_included);
    const auto q = grids::make_quadrature(g);
    worst = std::max(worst,
                     std::abs(kt.sum(q.weights.data(), q.weights.size()) - 2.0));
  }
  {
    const Grid g = Grid::rect2d(10, 10, NodePlacement::cell_centered);
    const auto q = grids::make_quadrature(g);
    worst = std::max(worst,
                     std::abs(kt.sum(q.weights.data(), q.weights.size()) - 1.0));
  }
  {
    const Grid g = Grid::angular_product(
        Grid::rect2d(11, 11, NodePlacement::endpoints_included), 4);
    const auto q = grids::make_quadrature(g);
    worst = std::max(worst,
                     std::abs(kt.sum(q.weights.data(), q.weights.size()) - 1.0));
  }
  return worst;
}

double quadrature_sin_orthogonality() {
  const double pi = std::numbers::pi;
  const Grid g = Grid::line1d(0.0, 1.0, 257, NodePlacement::endpoints_included);
  const auto q = grids::make_quadrature(g);
  const auto s1 = grids::sample_on_grid(
      std::function<double(double)>([pi](double x) { return std::sin(pi * x); }), g);
  const auto s2 = grids::sample_on_grid(
      std::function<double(double)>([pi](double x) { return std::sin(2.0 * pi * x); }),
      g);
  return std::abs(grids::inner_product(s1, s2, q));
}

double kernel_backend_divergence() {
  namespace k = kernels;
  if (!k::backend_available(k::Backend::avx2)) return 0.0;
  const auto& a = k::table_for(k::Backend::scalar);
  const auto& b = k::table_for(k::Backend::avx2);
  Rng rng(99);
  const std::size_t n = 1003;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = rng.uniform(-1.0, 1.0);
    y[i] = rng.uniform(-1.0, 1.0);
  }
  const double d1 = a.dot(x.data(), y.data(), n);
  const double d2 = b.dot(x.data(), y.data(), n);
  double worst = std::abs(d1 - d2) / std::max(1.0, std::abs(d1));

  std::vector<double> ya = y, yb = y;
  a.axpy(n, 0.37, x.data(), ya.data());
  b.axpy(n, 0.37, x.data(), yb.data());
  for (std::size_t i = 0; i < n; ++i)
    worst = std::max(worst, std::abs(ya[i] - yb[i]));
  return worst;
}

std::vector<Check> run_verify_checks(std::size_t grad_nets,
                                     std::uint64_t seed) {
  std::vector<Check> checks;
  auto add = [&checks](const std::string& name, bool pass, double value,
                       double bound) {
    std::ostringstream os;
    os << "value=" << value << " bound=" << bound;
    checks.push_back({name, pass, os.str()});
  };

  const double grad = gradient_check_batch(grad_nets, seed);
  add("gradient_check", grad < 1e-5, grad, 1e-5);

  const EllipticOracle ell = elliptic_manufactured_oracle();
  add("elliptic_manufactured", ell.max_err_fine < 1e-2, ell.max_err_fine, 1e-2);
  add("elliptic_order",
      ell.observed_order > 2.0 * 0.8 && ell.observed_order < 2.0 * 1.2,
      ell.observed_order, 2.0);

  const double heat = heat_mode_decay_error();
  add("heat_mode_decay", heat < 1e-5, heat, 1e-5);
  const double heat2 = heat_mode_ratio_error();
  add("heat_mode_ratio", heat2 < 1e-4, heat2, 1e-4);

  const double rte_c = rte_constant_error();
  add("rte_constant", rte_c < 1e-12, rte_c, 1e-12);
  const double rte_i = rte_isotropic_error();
  add("rte_isotropic", rte_i < 1e-8, rte_i, 1e-8);

  const double vol = quadrature_volume_error();
  add("quadrature_volume", vol < 1e-12, vol, 1e-12);
  const double ortho = quadrature_sin_orthogonality();
  add("quadrature_sin_orthogonality", ortho < 1e-4, ortho, 1e-4);

  const double kdiv = kernel_backend_divergence();
  add("kernel_backend_equivalence", kdiv < 1e-12, kdiv, 1e-12);

  return checks;
}

} // namespace c2bnet::harness::verify
