#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "c2bnet/model.hpp"
#include "c2bnet/pde.hpp"

namespace c2bnet::training {

using model::C2BNet;
using pde::Dataset;

struct TrainConfig {
  double lr = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_epochs = 30000; // 0 is allowed and returns the net unchanged
  std::size_t batch_size = 0;     // 0 = full batch; shuffling is seeded
  double weight_ema = 0.0;        // >0: return the exponential average of the
                                  // iterates (decay per epoch) instead of the
                                  // final iterate
  std::size_t early_stop_window = 500;
  double early_stop_rel_improvement = 1e-8;
  std::uint64_t seed = 0; // shuffling stream; network init happens at construction
  std::optional<std::vector<bool>> freeze_mask;
  std::size_t log_every = 0; // 0 disables progress lines
  bool standardize_inputs = true;
};

struct TrainReport {
  std::vector<double> loss_curve; // per-epoch training loss
  std::vector<double> best_curve; // running minimum (monotone)
  double final_train_loss = 0.0;
  double wall_time_s = 0.0;
  std::size_t epochs_run = 0;
  std::string stop_reason; // "max_epochs" | "early_stop" | "zero_budget"
};

/// Full-batch Adam on the quadrature-weighted empirical risk. Early stop when
/// the running best loss improves by less than early_stop_rel_improvement
/// (relatively) over the trailing window. Deterministic given (net, data,
/// config). Progress lines `epoch=<k> loss=<v>` go to stderr every log_every
/// epochs. Throws std::runtime_error with the epoch index if the loss turns
/// non-finite.
std::pair<C2BNet, TrainReport> train(C2BNet net, const Dataset& data,
                                     const TrainConfig& cfg);

struct EvalResult {
  double mean_rel_error = 0.0;
  std::vector<double> per_sample;
};

/// Mean relative error over the test set in the requested norm.
/// Throws std::invalid_argument on an empty test set or grid mismatch.
EvalResult evaluate(const C2BNet& net, const Dataset& test, grids::Norm norm);

/// Deterministic index split: first n_train rows for training, the trailing
/// block for testing. Throws std::invalid_argument if n_train >= data size.
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t n_train);

} // namespace c2bnet::training
