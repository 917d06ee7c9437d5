#include <fstream>

#include <json.hpp>

#include "c2bnet/harness.hpp"
#include "c2bnet/io.hpp"

namespace c2bnet::harness {

using json = nlohmann::json;
using grids::Grid;
using grids::NodePlacement;

pde::GenOptions ExperimentConfig::gen_options() const {
  pde::GenOptions opt;
  opt.rte_cells = (profile == "fast") ? 32 : 256;
  opt.threads = threads;
  return opt;
}

std::size_t ExperimentConfig::max_n() const {
  std::size_t m = 0;
  for (std::size_t n : n_values) m = std::max(m, n);
  return m;
}

ExperimentConfig default_config(const std::string& problem) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  cfg.output_grid = pde::default_output_grid(problem); // throws on bad tag

  if (problem == "elliptic") {
    cfg.d_low = 12;
    cfg.metric = grids::Norm::l2;
    cfg.transfer_grid = Grid::rect2d(20, 20, NodePlacement::cell_centered);
  } else if (problem == "heat") {
    cfg.d_low = 20;
    cfg.metric = grids::Norm::l2;
    cfg.transfer_grid =
        Grid::line1d(0.0, 2.0, 127, NodePlacement::endpoints_included);
  } else if (problem == "rte") {
    cfg.d_low = 50;
    cfg.metric = grids::Norm::l1;
  } else if (problem == "synthetic") {
    // latent width 8: with a single repeated input point, a ReLU latent
    // layer is dead at init with probability 2^-d_low
    cfg.d_low = 8;
    cfg.metric = grids::Norm::l2;
    cfg.n_values = {4, 8};
    cfg.trials = 1;
    cfg.test_size = 8;
    cfg.train.max_epochs = 6000;
    // constant inputs would z-score to exactly zero and stall every ReLU
    cfg.train.standardize_inputs = false;
  }
  return cfg;
}

namespace {

grids::Norm norm_from_json(const json& j) {
  return grids::norm_from_name(j.get<std::string>());
}

void apply_train(training::TrainConfig& t, const json& j) {
  if (j.contains("lr")) t.lr = j["lr"].get<double>();
  if (j.contains("adam_beta1")) t.adam_beta1 = j["adam_beta1"].get<double>();
  if (j.contains("adam_beta2")) t.adam_beta2 = j["adam_beta2"].get<double>();
  if (j.contains("adam_eps")) t.adam_eps = j["adam_eps"].get<double>();
  if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("weight_ema")) t.weight_ema = j["weight_ema"].get<double>();
  if (j.contains("max_epochs")) t.max_epochs = j["max_epochs"].get<std::size_t>();
  if (j.contains("early_stop_window"))
    t.early_stop_window = j["early_stop_window"].get<std::size_t>();
  if (j.contains("early_stop_rel_improvement"))
    t.early_stop_rel_improvement = j["early_stop_rel_improvement"].get<double>();
  if (j.contains("log_every")) t.log_every = j["log_every"].get<std::size_t>();
  if (j.contains("standardize_inputs"))
    t.standardize_inputs = j["standardize_inputs"].get<bool>();
}

void apply_finetune(model::FinetuneOptions& f, const json& j) {
  if (j.contains("lr")) f.lr = j["lr"].get<double>();
  if (j.contains("max_epochs")) f.max_epochs = j["max_epochs"].get<std::size_t>();
  if (j.contains("early_stop_window"))
    f.early_stop_window = j["early_stop_window"].get<std::size_t>();
  if (j.contains("early_stop_rel_improvement"))
    f.early_stop_rel_improvement = j["early_stop_rel_improvement"].get<double>();
  if (j.contains("warm_start")) f.warm_start = j["warm_start"].get<bool>();
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    if (!j.contains("problem"))
      throw ConfigError("config missing required field 'problem'");
    ExperimentConfig cfg = default_config(j["problem"].get<std::string>());

    if (j.contains("n_values"))
      cfg.n_values = j["n_values"].get<std::vector<std::size_t>>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<std::size_t>();
    if (j.contains("d_low")) cfg.d_low = j["d_low"].get<std::size_t>();
    if (j.contains("output_grid"))
      cfg.output_grid = io::grid_from_json(j["output_grid"]);
    if (j.contains("transfer_grid"))
      cfg.transfer_grid = io::grid_from_json(j["transfer_grid"]);
    if (j.contains("noise_sigma")) cfg.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("test_size")) cfg.test_size = j["test_size"].get<std::size_t>();
    if (j.contains("metric")) cfg.metric = norm_from_json(j["metric"]);
    if (j.contains("profile")) cfg.profile = j["profile"].get<std::string>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    if (j.contains("train")) apply_train(cfg.train, j["train"]);
    if (j.contains("finetune")) apply_finetune(cfg.finetune, j["finetune"]);

    if (cfg.n_values.empty()) throw ConfigError("n_values must be nonempty");
    for (std::size_t i = 1; i < cfg.n_values.size(); ++i)
      if (cfg.n_values[i] <= cfg.n_values[i - 1])
        throw ConfigError("n_values must be strictly increasing");
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    if (cfg.profile != "fast" && cfg.profile != "paper")
      throw ConfigError("profile must be 'fast' or 'paper'");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config field error in " + path + ": " + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = cfg.problem;
  j["n_values"] = cfg.n_values;
  j["trials"] = cfg.trials;
  j["d_low"] = cfg.d_low;
  j["output_grid"] = io::grid_to_json(cfg.output_grid);
  if (cfg.transfer_grid)
    j["transfer_grid"] = io::grid_to_json(*cfg.transfer_grid);
  j["noise_sigma"] = cfg.noise_sigma;
  j["seed"] = cfg.seed;
  j["test_size"] = cfg.test_size;
  j["metric"] = grids::norm_name(cfg.metric);
  j["profile"] = cfg.profile;
  j["threads"] = cfg.threads;
  j["train"] = {{"lr", cfg.train.lr},
                {"batch_size", cfg.train.batch_size},
                {"max_epochs", cfg.train.max_epochs},
                {"early_stop_window", cfg.train.early_stop_window},
                {"early_stop_rel_improvement", cfg.train.early_stop_rel_improvement},
                {"log_every", cfg.train.log_every},
                {"standardize_inputs", cfg.train.standardize_inputs}};
  j["finetune"] = {{"lr", cfg.finetune.lr},
                   {"max_epochs", cfg.finetune.max_epochs},
                   {"early_stop_window", cfg.finetune.early_stop_window},
                   {"early_stop_rel_improvement", cfg.finetune.early_stop_rel_improvement},
                   {"warm_start", cfg.finetune.warm_start}};
  return j.dump(2);
}

} // namespace c2bnet::harness
