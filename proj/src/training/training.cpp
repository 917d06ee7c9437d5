#include "c2bnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace c2bnet::training {

using numkit::Matrix;

std::pair<C2BNet, TrainReport> train(C2BNet net, const Dataset& data,
                                     const TrainConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (!data.input_grid.same_as(net.input_grid()) ||
      !data.output_grid.same_as(net.output_grid()))
    throw std::invalid_argument("train: dataset grids do not match the model");
  if (cfg.freeze_mask && cfg.freeze_mask->size() != net.net().layers().size())
    throw std::invalid_argument("train: freeze mask length mismatch");

  const auto t_start = std::chrono::steady_clock::now();
  TrainReport report;

  if (cfg.max_epochs == 0) {
    report.stop_reason = "zero_budget";
    report.final_train_loss = model::quadrature_loss(
        net.forward_batch(data.inputs), data.outputs,
        grids::make_quadrature(data.output_grid));
    return {std::move(net), std::move(report)};
  }

  net.set_normalizer(cfg.standardize_inputs
                         ? model::Normalizer::fit(data.inputs)
                         : model::Normalizer::identity(data.inputs.cols()));

  const Matrix X = net.normalizer().apply(data.inputs);
  const Matrix& targets = data.outputs;
  const grids::Quadrature q = grids::make_quadrature(data.output_grid);

  nn::AdamState state = nn::adam_state_for(net.net(), cfg.adam_beta1,
                                           cfg.adam_beta2, cfg.adam_eps);
  report.loss_curve.reserve(cfg.max_epochs);
  report.best_curve.reserve(cfg.max_epochs);
  report.stop_reason = "max_epochs";

  const std::size_t n = X.rows();
  const std::size_t batch =
      (cfg.batch_size == 0 || cfg.batch_size >= n) ? n : cfg.batch_size;
  numkit::Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Matrix xb(batch, X.cols()), tb(batch, targets.cols());

  nn::Mlp ema = net.net();
  const double ema_decay = cfg.weight_ema;

  double best = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    if (epoch >= cfg.early_stop_window) {
      const double before = report.best_curve[epoch - cfg.early_stop_window];
      if (before - best < cfg.early_stop_rel_improvement * before) {
        report.stop_reason = "early_stop";
        break;
      }
    }
    double loss = 0.0;
    if (batch == n) {
      nn::ForwardCache cache;
      const Matrix preds = nn::mlp_forward(net.net(), X, cache);
      loss = model::quadrature_loss(preds, targets, q);
      if (std::isfinite(loss)) {
        const Matrix dLdY = model::quadrature_loss_grad(preds, targets, q);
        const nn::Gradients grads = nn::mlp_backward(net.net(), cache, dLdY);
        nn::adam_step(net.net(), grads, state, cfg.lr, cfg.freeze_mask);
      }
    } else {
      // seeded Fisher-Yates, one Adam step per minibatch
      for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = shuffle_rng.next_u64() % (i + 1);
        std::swap(order[i], order[j]);
      }
      double sq_sum = 0.0;
      for (std::size_t start = 0; start < n; start += batch) {
        const std::size_t count = std::min(batch, n - start);
        Matrix* xp = &xb;
        Matrix* tp = &tb;
        Matrix x_tail, t_tail;
        if (count != batch) {
          x_tail = Matrix(count, X.cols());
          t_tail = Matrix(count, targets.cols());
          xp = &x_tail;
          tp = &t_tail;
        }
        for (std::size_t r = 0; r < count; ++r) {
          const std::size_t src = order[start + r];
          for (std::size_t c2 = 0; c2 < X.cols(); ++c2) (*xp)(r, c2) = X(src, c2);
          for (std::size_t c2 = 0; c2 < targets.cols(); ++c2)
            (*tp)(r, c2) = targets(src, c2);
        }
        nn::ForwardCache cache;
        const Matrix preds = nn::mlp_forward(net.net(), *xp, cache);
        const double batch_loss = model::quadrature_loss(preds, *tp, q);
        sq_sum += batch_loss * static_cast<double>(count);
        if (!std::isfinite(batch_loss)) {
          sq_sum = batch_loss;
          break;
        }
        const Matrix dLdY = model::quadrature_loss_grad(preds, *tp, q);
        const nn::Gradients grads = nn::mlp_backward(net.net(), cache, dLdY);
        nn::adam_step(net.net(), grads, state, cfg.lr, cfg.freeze_mask);
      }
      loss = sq_sum / static_cast<double>(n);
    }
    if (!std::isfinite(loss))
      throw std::runtime_error("train: non-finite loss at epoch " +
                               std::to_string(epoch));

    best = (epoch == 0) ? loss : std::min(best, loss);
    report.loss_curve.push_back(loss);
    report.best_curve.push_back(best);
    if (cfg.log_every > 0 && epoch % cfg.log_every == 0)
      std::fprintf(stderr, "epoch=%zu loss=%.17g\n", epoch, loss);
    report.epochs_run = epoch + 1;

    if (ema_decay > 0.0) {
      const double keep = ema_decay, mix = 1.0 - ema_decay;
      for (std::size_t l = 0; l < ema.layers().size(); ++l) {
        nn::Layer& e = ema.layers()[l];
        const nn::Layer& c = net.net().layers()[l];
        for (std::size_t i = 0; i < e.weights.size(); ++i)
          e.weights.data()[i] = keep * e.weights.data()[i] + mix * c.weights.data()[i];
        for (std::size_t i = 0; i < e.bias.size(); ++i)
          e.bias[i] = keep * e.bias[i] + mix * c.bias[i];
      }
    }
  }
  if (ema_decay > 0.0) net.net() = ema;

  report.final_train_loss =
      model::quadrature_loss(net.forward_batch(data.inputs), targets, q);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return {std::move(net), std::move(report)};
}

EvalResult evaluate(const C2BNet& net, const Dataset& test, grids::Norm norm) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  if (!test.input_grid.same_as(net.input_grid()) ||
      !test.output_grid.same_as(net.output_grid()))
    throw std::invalid_argument("evaluate: dataset grids do not match the model");

  const grids::Quadrature q = grids::make_quadrature(test.output_grid);
  const Matrix preds = net.forward_batch(test.inputs);

  EvalResult res;
  res.per_sample.resize(test.size());
  grids::DiscreteField pf{test.output_grid, {}};
  grids::DiscreteField tf{test.output_grid, {}};
  for (std::size_t i = 0; i < test.size(); ++i) {
    pf.values = preds.row_copy(i);
    tf.values = test.outputs.row_copy(i);
    res.per_sample[i] = grids::relative_error(pf, tf, q, norm);
    res.mean_rel_error += res.per_sample[i];
  }
  res.mean_rel_error /= static_cast<double>(test.size());
  return res;
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t n_train) {
  if (n_train == 0 || n_train >= data.size())
    throw std::invalid_argument("split: n_train must be in (0, n)");
  return {data.subset(0, n_train),
          data.subset(n_train, data.size() - n_train)};
}

} // namespace c2bnet::training
