#pragma once

#include <cstdint>
#include <vector>

#include "c2bnet/grids.hpp"
#include "c2bnet/nn.hpp"
#include "c2bnet/pde.hpp"

namespace c2bnet::model {

using grids::Grid;
using grids::Quadrature;
using numkit::Matrix;
using numkit::Rng;

/// Per-feature z-score parameters learned from training inputs. Features with
/// zero variance get std 1 so they pass through unchanged.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std_dev;

  static Normalizer identity(std::size_t dim);
  static Normalizer fit(const Matrix& X);
  std::vector<double> apply(const std::vector<double>& u) const;
  Matrix apply(const Matrix& X) const;

  bool operator==(const Normalizer&) const = default;
};

/// Operator network: a ReLU coefficient network mapping the discretized input
/// function to d_low latent coefficients, composed with a bias-free linear
/// basis layer whose rows are the discretized output basis functions.
/// Layer sizes: D1 -> hidden... -> d_low (ReLU, biased) -> D2 (linear, no bias).
class C2BNet {
 public:
  C2BNet() = default;
  C2BNet(nn::Mlp net, Normalizer norm, Grid input_grid, Grid output_grid);

  const nn::Mlp& net() const { return net_; }
  nn::Mlp& net() { return net_; }
  const Normalizer& normalizer() const { return norm_; }
  void set_normalizer(Normalizer n) { norm_ = std::move(n); }
  const Grid& input_grid() const { return input_grid_; }
  const Grid& output_grid() const { return output_grid_; }

  std::size_t input_dim() const { return net_.input_dim(); }
  std::size_t output_dim() const { return net_.output_dim(); }
  std::size_t d_low() const;

  /// The basis layer's weight matrix, D2 x d_low; row k holds the basis
  /// values at output node k.
  const Matrix& basis() const;

  std::vector<double> forward(const std::vector<double>& u) const;
  Matrix forward_batch(const Matrix& X_raw) const;

  /// Latent coefficients (the layer feeding the basis), n x d_low.
  Matrix latent_batch(const Matrix& X_raw) const;
  std::vector<double> latent(const std::vector<double>& u) const;

  /// Copy of this model with the basis layer replaced (used by fine-tuning).
  C2BNet with_new_basis(Matrix basis, const Grid& new_output_grid) const;

  bool operator==(const C2BNet&) const = default;

 private:
  nn::Mlp net_;
  Normalizer norm_;
  Grid input_grid_;
  Grid output_grid_;
};

C2BNet make_c2bnet(const Grid& input_grid, const Grid& output_grid,
                   std::size_t d_low, Rng& rng,
                   const std::vector<std::size_t>& hidden = {100, 100, 100});

/// (1/n) Σ_i Σ_k τ_k (pred_ik - target_ik)^2
double quadrature_loss(const Matrix& preds, const Matrix& targets,
                       const Quadrature& q);
/// dLoss/dpred for the quadrature loss: (2/n) τ_k (pred - target).
Matrix quadrature_loss_grad(const Matrix& preds, const Matrix& targets,
                            const Quadrature& q);

/// Freeze mask training only the final (basis) layer.
std::vector<bool> basis_only_mask(const C2BNet& net);

struct FinetuneOptions {
  double lr = 1e-3;
  std::size_t max_epochs = 30000;
  std::size_t early_stop_window = 500;
  double early_stop_rel_improvement = 1e-8;
  std::uint64_t seed = 0;
  bool warm_start = false; // resample the old basis onto the new grid
  std::size_t log_every = 0;
};

struct FinetuneReport {
  double final_train_loss = 0.0;
  std::size_t epochs_run = 0;
  double wall_time_s = 0.0;
};

/// Adapts a trained model to a new output grid by retraining only the basis
/// layer with Adam; the coefficient network and normalizer are reused
/// untouched. Throws std::invalid_argument if the dataset's input grid does
/// not match the model's.
C2BNet finetune_gradient(const C2BNet& base, const pde::Dataset& new_data,
                         const FinetuneOptions& opt,
                         FinetuneReport* report = nullptr);

struct ExactFinetuneResult {
  C2BNet net;
  double condition_estimate = 0.0; // of the (ridged) feature Gram
};

/// Closed-form basis fit: the frozen-feature subproblem is linear least
/// squares per output node, solved by ridge-regularized normal equations
/// (quadrature weights fold into each node's system; they cancel when the
/// weights are uniform).
ExactFinetuneResult finetune_exact(const C2BNet& base,
                                   const pde::Dataset& new_data,
                                   double ridge = 1e-10);

/// Piecewise-(bi)linear resampling of basis rows onto a new grid; exact copy
/// when the grids are identical. Used for warm-started fine-tuning.
Matrix resample_basis(const Matrix& basis, const Grid& old_grid,
                      const Grid& new_grid);

} // namespace c2bnet::model
