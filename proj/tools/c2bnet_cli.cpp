// Command-line frontend: dataset generation, training, fine-tuning, error
// sweeps, fine-tune-vs-retrain comparisons, solver verification, CSV
// aggregation, and the output-spectrum diagnostic. A JSON config file is the
// source of truth for each run; flags override individual fields.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "c2bnet/harness.hpp"
#include "c2bnet/io.hpp"
#include "c2bnet/kernels.hpp"
#include "c2bnet/verify.hpp"

namespace fs = std::filesystem;
using namespace c2bnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::string problem;
  std::string out; // per-command default when empty
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool fast = false;
  bool paper = false;
};

void add_common(CLI::App* cmd, CommonOpts& c, bool need_problem_or_config) {
  auto* cfg = cmd->add_option("--config", c.config_path,
                              "JSON experiment config (source of truth)");
  auto* prob = cmd->add_option("--problem", c.problem,
                               "problem preset: rte|elliptic|heat|synthetic");
  if (need_problem_or_config) {
    cfg->excludes(prob);
  }
  cmd->add_option("--out", c.out, "output directory or file");
  cmd->add_flag("--fast", c.fast, "32x32 transport solve grid");
  cmd->add_flag("--paper", c.paper, "64x64 transport solve grid (default)");
  cmd
      ->add_option_function<std::uint64_t>(
          "--seed",
          [&c](std::uint64_t v) {
            c.seed = v;
            c.seed_set = true;
          },
          "override the config seed")
      ->expected(1);
}

harness::ExperimentConfig resolve_config(const CommonOpts& c) {
  harness::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    cfg = harness::load_config(c.config_path);
  } else if (!c.problem.empty()) {
    cfg = harness::default_config(c.problem);
  } else {
    throw harness::ConfigError("either --config or --problem is required");
  }
  if (c.seed_set) cfg.seed = c.seed;
  if (c.fast && c.paper)
    throw harness::ConfigError("--fast and --paper are mutually exclusive");
  if (c.fast) cfg.profile = "fast";
  if (c.paper) cfg.profile = "paper";
  return cfg;
}

fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out.empty() ? "." : out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io::IoError("cannot create output directory: " + out);
  return dir;
}

void print_sweep_summary(const harness::ExperimentConfig& cfg,
                         const harness::SweepResult& result) {
  std::printf("problem=%s metric=%s\n", cfg.problem.c_str(),
              grids::norm_name(cfg.metric));
  for (const auto& [n, err] : result.per_n_mean_error)
    std::printf("n=%zu mean_rel_error=%s\n", n,
                harness::format_double(err).c_str());
  std::printf("power_law slope=%s intercept=%s r2=%s\n",
              harness::format_double(result.fit.slope).c_str(),
              harness::format_double(result.fit.intercept).c_str(),
              harness::format_double(result.fit.r2).c_str());
}

int run_generate(const CommonOpts& c, std::size_t n_override, bool transfer) {
  harness::ExperimentConfig cfg = resolve_config(c);
  if (n_override > 0) {
    // clamp the pool size to the requested count by shrinking the sweep axis
    cfg.n_values = {n_override};
    cfg.test_size = 0;
  }
  const pde::Dataset ds =
      transfer ? harness::make_transfer_dataset(cfg) : harness::make_sweep_dataset(cfg);
  const fs::path out = c.out.empty() ? fs::path("dataset.c2bd") : fs::path(c.out);
  io::save_dataset(ds, out.string());
  std::printf("wrote %s (n=%zu, D1=%zu, D2=%zu)\n", out.string().c_str(),
              ds.size(), ds.inputs.cols(), ds.outputs.cols());
  return kExitOk;
}

int run_train(const CommonOpts& c, const std::string& data_path,
              std::size_t n, std::size_t trial) {
  harness::ExperimentConfig cfg = resolve_config(c);
  const pde::Dataset data = data_path.empty()
                                ? harness::make_sweep_dataset(cfg)
                                : io::load_dataset(data_path);
  if (n == 0) n = cfg.max_n();
  const harness::TrainRunResult run = harness::train_single(cfg, data, n, trial);
  std::printf("n=%zu trial=%zu train_loss=%s test_%s=%s epochs=%zu stop=%s\n", n,
              trial, harness::format_double(run.report.final_train_loss).c_str(),
              grids::norm_name(cfg.metric),
              harness::format_double(run.test_error).c_str(),
              run.report.epochs_run, run.report.stop_reason.c_str());
  if (!c.out.empty()) {
    io::save_checkpoint(run.net, c.out);
    std::printf("checkpoint: %s\n", c.out.c_str());
  }
  return kExitOk;
}

int run_finetune(const CommonOpts& c, const std::string& base_path,
                 const std::string& data_path, std::size_t n, bool exact,
                 bool gradient) {
  harness::ExperimentConfig cfg = resolve_config(c);
  if (base_path.empty())
    throw harness::ConfigError("finetune: --base checkpoint is required");
  const model::C2BNet base = io::load_checkpoint(base_path);
  pde::Dataset data = data_path.empty() ? harness::make_transfer_dataset(cfg)
                                        : io::load_dataset(data_path);
  if (n == 0) n = cfg.max_n();
  if (n > data.size()) throw harness::ConfigError("finetune: n exceeds dataset");
  const pde::Dataset train_set = data.subset(0, n);

  model::C2BNet tuned;
  if (exact && gradient)
    throw harness::ConfigError("finetune: pick one of --exact / --gradient");
  if (gradient) {
    model::FinetuneOptions opt = cfg.finetune;
    opt.seed = cfg.seed;
    model::FinetuneReport rep;
    tuned = model::finetune_gradient(base, train_set, opt, &rep);
    std::printf("gradient finetune: trainable_params=%zu train_loss=%s epochs=%zu\n",
                base.d_low() * train_set.output_grid.size(),
                harness::format_double(rep.final_train_loss).c_str(),
                rep.epochs_run);
  } else {
    const model::ExactFinetuneResult res = model::finetune_exact(base, train_set);
    tuned = res.net;
    const double loss = model::quadrature_loss(
        tuned.forward_batch(train_set.inputs), train_set.outputs,
        grids::make_quadrature(train_set.output_grid));
    std::printf("exact finetune: trainable_params=%zu train_loss=%s cond_estimate=%s\n",
                base.d_low() * train_set.output_grid.size(),
                harness::format_double(loss).c_str(),
                harness::format_double(res.condition_estimate).c_str());
  }
  if (data.size() > n) {
    const pde::Dataset test_set = data.subset(data.size() - std::min(cfg.test_size, data.size() - n),
                                              std::min(cfg.test_size, data.size() - n));
    const double err = training::evaluate(tuned, test_set, cfg.metric).mean_rel_error;
    std::printf("test_%s=%s\n", grids::norm_name(cfg.metric),
                harness::format_double(err).c_str());
  }
  if (!c.out.empty()) {
    io::save_checkpoint(tuned, c.out);
    std::printf("checkpoint: %s\n", c.out.c_str());
  }
  return kExitOk;
}

int run_retrain(const CommonOpts& c, const std::string& data_path,
                std::size_t n) {
  harness::ExperimentConfig cfg = resolve_config(c);
  pde::Dataset data = data_path.empty() ? harness::make_transfer_dataset(cfg)
                                        : io::load_dataset(data_path);
  if (n == 0) n = cfg.max_n();
  harness::ExperimentConfig tcfg = cfg;
  tcfg.output_grid = data.output_grid;
  const harness::TrainRunResult run = harness::train_single(tcfg, data, n, 0);
  std::printf("retrain: params=%zu train_loss=%s test_%s=%s epochs=%zu\n",
              nn::count_params(run.net.net()),
              harness::format_double(run.report.final_train_loss).c_str(),
              grids::norm_name(cfg.metric),
              harness::format_double(run.test_error).c_str(),
              run.report.epochs_run);
  if (!c.out.empty()) {
    io::save_checkpoint(run.net, c.out);
    std::printf("checkpoint: %s\n", c.out.c_str());
  }
  return kExitOk;
}

int run_sweep_cmd(const CommonOpts& c) {
  const harness::ExperimentConfig cfg = resolve_config(c);
  const harness::SweepResult result = harness::run_sweep(cfg);
  const fs::path dir = prepare_out_dir(c.out);
  harness::write_sweep_csv((dir / "results.csv").string(), cfg, result);
  harness::write_decay_dat((dir / (cfg.problem + "_decay.dat")).string(), result);
  harness::write_fit_csv((dir / "fit.csv").string(), cfg.problem, result.fit);
  print_sweep_summary(cfg, result);
  std::printf("results: %s\n", (dir / "results.csv").string().c_str());
  return kExitOk;
}

int run_compare(const CommonOpts& c, const std::string& base_path) {
  const harness::ExperimentConfig cfg = resolve_config(c);
  if (base_path.empty())
    throw harness::ConfigError("compare: --base checkpoint is required");
  const model::C2BNet base = io::load_checkpoint(base_path);
  const harness::CompareResult result = harness::compare_finetune(cfg, base);
  const fs::path dir = prepare_out_dir(c.out);
  harness::write_compare_csv((dir / "compare.csv").string(), cfg, result);
  std::printf("n | finetune_grad | finetune_exact | retrain | params (ft/rt)\n");
  for (const auto& r : result.rows)
    std::printf("%zu | %.6g | %.6g | %.6g | %zu/%zu\n", r.n,
                r.error_finetune_gradient, r.error_finetune_exact,
                r.error_retrain, r.trainable_params_finetune,
                r.trainable_params_retrain);
  std::printf("results: %s\n", (dir / "compare.csv").string().c_str());
  return kExitOk;
}

int run_verify(std::size_t nets) {
  const auto checks = harness::verify::run_verify_checks(nets);
  bool all_pass = true;
  for (const auto& check : checks) {
    std::printf("[%s] %s: %s\n", check.pass ? "PASS" : "FAIL",
                check.name.c_str(), check.detail.c_str());
    all_pass = all_pass && check.pass;
  }
  return all_pass ? kExitOk : kExitNumeric;
}

int run_report(const std::vector<std::string>& csvs, const std::string& out) {
  const fs::path dir = prepare_out_dir(out);
  for (const std::string& path : csvs) {
    const harness::SweepResult result = harness::read_sweep_csv(path);
    const std::string stem = fs::path(path).stem().string();
    harness::write_decay_dat((dir / (stem + "_decay.dat")).string(), result);
    harness::write_fit_csv((dir / (stem + "_fit.csv")).string(), stem, result.fit);
    std::printf("%s: slope=%s r2=%s\n", path.c_str(),
                harness::format_double(result.fit.slope).c_str(),
                harness::format_double(result.fit.r2).c_str());
  }
  return kExitOk;
}

int run_spectrum(const std::string& data_path, std::size_t d2) {
  if (data_path.empty())
    throw harness::ConfigError("spectrum: --data is required");
  const pde::Dataset data = io::load_dataset(data_path);
  const harness::SpectrumDiag diag = harness::estimate_projection_residual(data, d2);
  std::printf("d2=%zu zeta_rms=%s\n", d2,
              harness::format_double(diag.zeta_rms).c_str());
  for (std::size_t i = 0; i < diag.eigenvalues.size(); ++i)
    std::printf("eigenvalue[%zu]=%s\n", i,
                harness::format_double(diag.eigenvalues[i]).c_str());
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"coefficient-to-basis operator learning for PDE inverse problems"};
  app.require_subcommand(1);

  CommonOpts c_gen, c_train, c_ft, c_rt, c_sweep, c_cmp;
  std::size_t gen_n = 0;
  bool gen_transfer = false;
  std::string train_data, ft_base, ft_data, rt_data, cmp_base, spec_data;
  std::size_t train_n = 0, train_trial = 0, ft_n = 0, rt_n = 0;
  bool ft_exact = false, ft_gradient = false;
  std::size_t verify_nets = 20;
  std::vector<std::string> report_csvs;
  std::string report_out = ".";
  std::size_t spec_d2 = 5;

  auto* generate = app.add_subcommand("generate", "generate a dataset file");
  add_common(generate, c_gen, true);
  generate->add_option("--n", gen_n, "sample count (default: sweep pool size)");
  generate->add_flag("--transfer", gen_transfer, "use the transfer output grid");

  auto* train = app.add_subcommand("train", "train one model");
  add_common(train, c_train, true);
  train->add_option("--data", train_data, "dataset file (default: generate)");
  train->add_option("--n", train_n, "training sample count");
  train->add_option("--trial", train_trial, "trial index (seed variation)");

  auto* finetune = app.add_subcommand("finetune",
                                      "retrain only the basis layer on a new grid");
  add_common(finetune, c_ft, true);
  finetune->add_option("--base", ft_base, "pre-trained checkpoint")->required();
  finetune->add_option("--data", ft_data, "transfer dataset file (default: generate)");
  finetune->add_option("--n", ft_n, "training sample count");
  finetune->add_flag("--exact", ft_exact, "closed-form least-squares fit (default)");
  finetune->add_flag("--gradient", ft_gradient, "Adam on the basis layer");

  auto* retrain = app.add_subcommand("retrain", "train from scratch on the transfer grid");
  add_common(retrain, c_rt, true);
  retrain->add_option("--data", rt_data, "transfer dataset file (default: generate)");
  retrain->add_option("--n", rt_n, "training sample count");

  auto* sweep = app.add_subcommand("sweep", "error decay over training set sizes");
  add_common(sweep, c_sweep, true);

  auto* compare = app.add_subcommand("compare", "fine-tune vs full retrain");
  add_common(compare, c_cmp, true);
  compare->add_option("--base", cmp_base, "pre-trained checkpoint")->required();

  auto* verify = app.add_subcommand("verify",
                                    "gradient checks + solver oracles + quadrature checks");
  verify->add_option("--nets", verify_nets, "number of gradient-check networks");

  auto* report = app.add_subcommand("report", "aggregate sweep CSVs, fit power laws");
  report->add_option("--csv", report_csvs, "sweep results.csv files")->required();
  report->add_option("--out", report_out, "output directory");

  auto* spectrum = app.add_subcommand("spectrum", "projection-residual diagnostic");
  spectrum->add_option("--data", spec_data, "dataset file")->required();
  spectrum->add_option("--d2", spec_d2, "subspace dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (generate->parsed()) return run_generate(c_gen, gen_n, gen_transfer);
    if (train->parsed()) return run_train(c_train, train_data, train_n, train_trial);
    if (finetune->parsed())
      return run_finetune(c_ft, ft_base, ft_data, ft_n, ft_exact, ft_gradient);
    if (retrain->parsed()) return run_retrain(c_rt, rt_data, rt_n);
    if (sweep->parsed()) return run_sweep_cmd(c_sweep);
    if (compare->parsed()) return run_compare(c_cmp, cmp_base);
    if (verify->parsed()) return run_verify(verify_nets);
    if (report->parsed()) return run_report(report_csvs, report_out);
    if (spectrum->parsed()) return run_spectrum(spec_data, spec_d2);
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const io::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
