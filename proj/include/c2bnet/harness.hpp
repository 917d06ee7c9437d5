#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "c2bnet/grids.hpp"
#include "c2bnet/model.hpp"
#include "c2bnet/pde.hpp"
#include "c2bnet/training.hpp"

namespace c2bnet::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a sweep or comparison needs; a JSON config file is the source
/// of truth and embeds all seeds.
struct ExperimentConfig {
  std::string problem; // rte | elliptic | heat | synthetic
  std::vector<std::size_t> n_values{36, 72, 108, 144, 225, 288, 360};
  std::size_t trials = 3;
  std::size_t d_low = 12;
  grids::Grid output_grid;
  std::optional<grids::Grid> transfer_grid;
  double noise_sigma = 0.0;
  std::uint64_t seed = 20240601;
  std::size_t test_size = 200;
  grids::Norm metric = grids::Norm::l2;
  std::string profile = "paper"; // "fast" halves the transport solve grid
  std::size_t threads = 0;       // 0 = hardware concurrency
  training::TrainConfig train;
  model::FinetuneOptions finetune;

  pde::GenOptions gen_options() const;
  std::size_t max_n() const;
};

/// Problem presets matching the experiments (grid sizes, latent widths,
/// metrics). Throws ConfigError for unknown tags.
ExperimentConfig default_config(const std::string& problem);

/// Reads a JSON config; missing fields take the problem preset's defaults.
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct SweepRecord {
  std::size_t n = 0;
  std::size_t trial = 0;
  double rel_error = 0.0;
  double train_loss = 0.0;
  double wall_time_s = 0.0;
};

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

struct SweepResult {
  std::vector<SweepRecord> records; // ordered by (n, trial)
  std::vector<std::pair<std::size_t, double>> per_n_mean_error;
  PowerLawFit fit;
};

/// Ordinary least squares on (log n, log error). Throws
/// std::invalid_argument for fewer than 3 points or nonpositive values.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

/// The sweep dataset (base output grid) and the transfer dataset (transfer
/// grid); both sized max(n_values) + test_size with seeds derived from the
/// config seed, so every consumer of a config sees identical data.
pde::Dataset make_sweep_dataset(const ExperimentConfig& cfg);
pde::Dataset make_transfer_dataset(const ExperimentConfig& cfg);

/// Generates (or reuses) the dataset, then for every (n, trial): train a
/// fresh model on the first n samples and evaluate on the shared trailing
/// test block. Fully deterministic given the config.
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Same dataset/protocol as run_sweep for a single (n, trial) — used by the
/// CLI train subcommand and tests.
struct TrainRunResult {
  model::C2BNet net;
  training::TrainReport report;
  double test_error = 0.0;
};
TrainRunResult train_single(const ExperimentConfig& cfg, const pde::Dataset& data,
                            std::size_t n, std::size_t trial);

struct CompareRow {
  std::size_t n = 0;
  double error_finetune_gradient = 0.0;
  double error_finetune_exact = 0.0;
  double error_retrain = 0.0;
  double loss_finetune_gradient = 0.0;
  double loss_finetune_exact = 0.0;
  std::size_t trainable_params_finetune = 0;
  std::size_t trainable_params_retrain = 0;
  double wall_gradient_s = 0.0;
  double wall_exact_s = 0.0;
  double wall_retrain_s = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
};

/// Fine-tune vs full retrain on the transfer grid: per n, (a) gradient
/// fine-tune of the basis layer, (b) closed-form fine-tune, (c) fresh model
/// trained from scratch, all evaluated on the shared transfer test block.
/// Throws ConfigError if the config has no transfer grid.
CompareResult compare_finetune(const ExperimentConfig& cfg,
                               const model::C2BNet& base);

struct SpectrumDiag {
  std::vector<double> eigenvalues; // top d2 of the weighted second moment
  double zeta_rms = 0.0;           // RMS weighted projection residual
};

/// Residual of projecting the outputs onto their top-d2 weighted principal
/// subspace. Throws std::invalid_argument if d2 exceeds the output dimension
/// or the dataset has fewer than 2 samples.
SpectrumDiag estimate_projection_residual(const pde::Dataset& data,
                                          std::size_t d2);

// Result files. CSV schema: problem,n,trial,metric,value,wall_time_s.
void write_sweep_csv(const std::string& path, const ExperimentConfig& cfg,
                     const SweepResult& result);
void write_decay_dat(const std::string& path, const SweepResult& result);
void write_fit_csv(const std::string& path, const std::string& problem,
                   const PowerLawFit& fit);
void write_compare_csv(const std::string& path, const ExperimentConfig& cfg,
                       const CompareResult& result);

/// Re-reads a sweep CSV and recomputes per-n means and the power-law fit.
SweepResult read_sweep_csv(const std::string& path);

/// Inversions in the per-n mean error sequence (spec allows at most one).
std::size_t count_mean_error_inversions(const SweepResult& result);

std::string format_double(double v); // shortest round-trip decimal

} // namespace c2bnet::harness
