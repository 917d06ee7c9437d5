#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "c2bnet/kernels.hpp"
#include "c2bnet/linalg.hpp"
#include "c2bnet/model.hpp"

namespace c2bnet::model {

namespace k = c2bnet::kernels;
using numkit::gemm_nt;
using numkit::gemm_tn;

namespace {

void check_input_grid(const C2BNet& base, const pde::Dataset& data) {
  if (!data.input_grid.same_as(base.input_grid()))
    throw std::invalid_argument(
        "finetune: dataset input grid does not match the model");
}

Matrix fresh_basis(std::size_t D2, std::size_t d_low, std::uint64_t seed) {
  Rng rng(seed);
  Matrix W(D2, d_low);
  const double std_dev = std::sqrt(2.0 / static_cast<double>(d_low));
  for (std::size_t i = 0; i < W.size(); ++i) W.data()[i] = std_dev * rng.normal();
  return W;
}

} // namespace

Matrix resample_basis(const Matrix& basis, const Grid& old_grid,
                      const Grid& new_grid) {
  if (basis.rows() != old_grid.size())
    throw std::invalid_argument("resample_basis: basis rows != old grid size");
  if (old_grid.same_as(new_grid)) return basis;
  if (old_grid.kind != new_grid.kind)
    throw std::invalid_argument("resample_basis: grid kind mismatch");

  const std::size_t d_low = basis.cols();
  Matrix out(new_grid.size(), d_low);

  if (old_grid.kind == grids::GridKind::line1d) {
    for (std::size_t kidx = 0; kidx < new_grid.size(); ++kidx) {
      const double x = new_grid.coord1d(kidx);
      // fractional index in the old axis, clamped to the node range
      double pos;
      if (old_grid.placement == grids::NodePlacement::endpoints_included)
        pos = (x - old_grid.a) / ((old_grid.b - old_grid.a) /
                                  static_cast<double>(old_grid.n - 1));
      else
        pos = (x - old_grid.a) / ((old_grid.b - old_grid.a) /
                                  static_cast<double>(old_grid.n)) -
              0.5;
      pos = std::clamp(pos, 0.0, static_cast<double>(old_grid.n - 1));
      const std::size_t i0 = static_cast<std::size_t>(std::floor(pos));
      const std::size_t i1 = std::min(i0 + 1, old_grid.n - 1);
      const double t = pos - static_cast<double>(i0);
      for (std::size_t c = 0; c < d_low; ++c)
        out(kidx, c) = (1.0 - t) * basis(i0, c) + t * basis(i1, c);
    }
    return out;
  }

  if (old_grid.kind == grids::GridKind::rect2d) {
    auto axis_pos = [](double v, double lo, double hi, std::size_t n,
                       grids::NodePlacement placement) {
      double pos;
      if (placement == grids::NodePlacement::endpoints_included)
        pos = (v - lo) / ((hi - lo) / static_cast<double>(n - 1));
      else
        pos = (v - lo) / ((hi - lo) / static_cast<double>(n)) - 0.5;
      return std::clamp(pos, 0.0, static_cast<double>(n - 1));
    };
    for (std::size_t kidx = 0; kidx < new_grid.size(); ++kidx) {
      double x, y;
      new_grid.coord2d(kidx, x, y);
      const double px = axis_pos(x, old_grid.ax, old_grid.bx, old_grid.nx,
                                 old_grid.placement);
      const double py = axis_pos(y, old_grid.ay, old_grid.by, old_grid.ny,
                                 old_grid.placement);
      const std::size_t ix0 = static_cast<std::size_t>(std::floor(px));
      const std::size_t iy0 = static_cast<std::size_t>(std::floor(py));
      const std::size_t ix1 = std::min(ix0 + 1, old_grid.nx - 1);
      const std::size_t iy1 = std::min(iy0 + 1, old_grid.ny - 1);
      const double tx = px - static_cast<double>(ix0);
      const double ty = py - static_cast<double>(iy0);
      for (std::size_t c = 0; c < d_low; ++c) {
        const double v00 = basis(iy0 * old_grid.nx + ix0, c);
        const double v10 = basis(iy0 * old_grid.nx + ix1, c);
        const double v01 = basis(iy1 * old_grid.nx + ix0, c);
        const double v11 = basis(iy1 * old_grid.nx + ix1, c);
        out(kidx, c) = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) +
                       ty * ((1.0 - tx) * v01 + tx * v11);
      }
    }
    return out;
  }
  throw std::invalid_argument("resample_basis: unsupported grid kind");
}

C2BNet finetune_gradient(const C2BNet& base, const pde::Dataset& new_data,
                         const FinetuneOptions& opt, FinetuneReport* report) {
  check_input_grid(base, new_data);
  const auto t_start = std::chrono::steady_clock::now();

  const Grid& out_grid = new_data.output_grid;
  const std::size_t D2 = out_grid.size();
  const std::size_t d_low = base.d_low();
  const std::size_t n = new_data.size();
  const grids::Quadrature q = grids::make_quadrature(out_grid);

  // features are frozen: compute them once and train the linear layer on top
  const Matrix Phi = base.latent_batch(new_data.inputs);

  Matrix W = opt.warm_start
                 ? resample_basis(base.basis(), base.output_grid(), out_grid)
                 : fresh_basis(D2, d_low, opt.seed);

  Matrix m(D2, d_low), v(D2, d_low);
  Matrix preds(n, D2), dW(D2, d_low);
  const auto& kt = k::table();

  double best = 0.0;
  std::vector<double> best_track;
  best_track.reserve(opt.max_epochs);
  std::size_t epochs_run = 0;
  double final_loss = 0.0;

  for (std::size_t epoch = 0; epoch < opt.max_epochs; ++epoch) {
    gemm_nt(Phi, W, preds);
    const double loss = quadrature_loss(preds, new_data.outputs, q);
    if (!std::isfinite(loss))
      throw std::runtime_error("finetune_gradient: non-finite loss at epoch " +
                               std::to_string(epoch));
    best = (epoch == 0) ? loss : std::min(best, loss);
    best_track.push_back(best);
    if (opt.log_every > 0 && epoch % opt.log_every == 0)
      std::fprintf(stderr, "epoch=%zu loss=%.17g\n", epoch, loss);
    if (epoch >= opt.early_stop_window) {
      const double before = best_track[epoch - opt.early_stop_window];
      if (before - best < opt.early_stop_rel_improvement * before) {
        epochs_run = epoch;
        break;
      }
    }

    const Matrix g = quadrature_loss_grad(preds, new_data.outputs, q);
    gemm_tn(g, Phi, dW);

    k::AdamParams p;
    p.beta1 = 0.9;
    p.beta2 = 0.999;
    p.eps = 1e-8;
    p.lr = opt.lr;
    const double t = static_cast<double>(epoch + 1);
    p.bias_correction1 = 1.0 / (1.0 - std::pow(p.beta1, t));
    p.bias_correction2 = 1.0 / (1.0 - std::pow(p.beta2, t));
    kt.adam_update(W.size(), W.data(), dW.data(), m.data(), v.data(), p);
    epochs_run = epoch + 1;
  }

  gemm_nt(Phi, W, preds);
  final_loss = quadrature_loss(preds, new_data.outputs, q);

  if (report) {
    report->final_train_loss = final_loss;
    report->epochs_run = epochs_run;
    report->wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
  }
  return base.with_new_basis(std::move(W), out_grid);
}

ExactFinetuneResult finetune_exact(const C2BNet& base,
                                   const pde::Dataset& new_data, double ridge) {
  check_input_grid(base, new_data);
  const Grid& out_grid = new_data.output_grid;
  const std::size_t D2 = out_grid.size();
  const std::size_t d_low = base.d_low();
  const std::size_t n = new_data.size();
  const grids::Quadrature q = grids::make_quadrature(out_grid);

  const Matrix Phi = base.latent_batch(new_data.inputs);

  Matrix G(d_low, d_low);
  gemm_tn(Phi, Phi, G);

  // right-hand sides: B = Phi^T targets, one column per output node
  Matrix B(d_low, D2);
  gemm_tn(Phi, new_data.outputs, B);

  Matrix W(D2, d_low);
  double worst_cond = 0.0;
  numkit::Matrix A(d_low, d_low);
  numkit::Vector rhs(d_low);
  for (std::size_t node = 0; node < D2; ++node) {
    const double tau = q.weights[node];
    for (std::size_t i = 0; i < d_low; ++i) {
      for (std::size_t j = 0; j < d_low; ++j) A(i, j) = tau * G(i, j);
      A(i, i) += ridge;
      rhs[i] = tau * B(i, node);
    }
    const double cond = numkit::cholesky_factor(A);
    worst_cond = std::max(worst_cond, cond);
    numkit::cholesky_solve_factored(A, rhs);
    for (std::size_t c = 0; c < d_low; ++c) W(node, c) = rhs[c];
  }

  ExactFinetuneResult res{base.with_new_basis(std::move(W), out_grid),
                          worst_cond};
  return res;
}

} // namespace c2bnet::model
