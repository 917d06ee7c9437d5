#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "c2bnet/harness.hpp"
#include "c2bnet/io.hpp"
#include "c2bnet/linalg.hpp"

namespace c2bnet::harness {

using numkit::Rng;

namespace {

// fixed seed-derivation labels so every stage has its own stream
constexpr std::uint64_t kDatasetLabel = 1;
constexpr std::uint64_t kTransferDatasetLabel = 2;
constexpr std::uint64_t kRetrainLabel = 3;
constexpr std::uint64_t kFinetuneLabel = 4;

std::uint64_t run_seed(std::uint64_t config_seed, std::size_t n,
                       std::size_t trial) {
  return Rng(config_seed).split(0x100000 + n * 1024 + trial).seed();
}

} // namespace

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_power_law: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(points.size());
  std::vector<double> xs(points.size()), ys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
      throw std::invalid_argument("fit_power_law: values must be positive");
    xs[i] = std::log(points[i].first);
    ys[i] = std::log(points[i].second);
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  PowerLawFit fit;
  const double denom = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;

  double ss_res = 0, ss_tot = 0;
  const double y_mean = sy / m;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double pred = fit.intercept + fit.slope * xs[i];
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - y_mean) * (ys[i] - y_mean);
  }
  fit.r2 = (ss_tot == 0.0) ? 1.0 : 1.0 - ss_res / ss_tot;
  fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
  return fit;
}

TrainRunResult train_single(const ExperimentConfig& cfg,
                            const pde::Dataset& data, std::size_t n,
                            std::size_t trial) {
  if (n + cfg.test_size > data.size())
    throw ConfigError("train_single: dataset too small for n + test block");
  const pde::Dataset train_set = data.subset(0, n);
  const pde::Dataset test_set =
      data.subset(data.size() - cfg.test_size, cfg.test_size);

  const std::uint64_t seed = run_seed(cfg.seed, n, trial);
  Rng rng(seed);
  model::C2BNet net =
      model::make_c2bnet(data.input_grid, data.output_grid, cfg.d_low, rng);

  training::TrainConfig tc = cfg.train;
  tc.seed = seed;
  auto [trained, report] = training::train(std::move(net), train_set, tc);

  TrainRunResult out{std::move(trained), std::move(report), 0.0};
  out.test_error =
      training::evaluate(out.net, test_set, cfg.metric).mean_rel_error;
  return out;
}

pde::Dataset make_sweep_dataset(const ExperimentConfig& cfg) {
  const std::uint64_t ds_seed = Rng(cfg.seed).split(kDatasetLabel).seed();
  return pde::generate_dataset(cfg.problem, cfg.max_n() + cfg.test_size,
                               ds_seed, cfg.noise_sigma, cfg.output_grid,
                               cfg.gen_options());
}

pde::Dataset make_transfer_dataset(const ExperimentConfig& cfg) {
  if (!cfg.transfer_grid)
    throw ConfigError("make_transfer_dataset: config has no transfer grid");
  const std::uint64_t ds_seed =
      Rng(cfg.seed).split(kTransferDatasetLabel).seed();
  return pde::generate_dataset(cfg.problem, cfg.max_n() + cfg.test_size,
                               ds_seed, cfg.noise_sigma, *cfg.transfer_grid,
                               cfg.gen_options());
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  const pde::Dataset data = make_sweep_dataset(cfg);

  const std::size_t tasks = cfg.n_values.size() * cfg.trials;
  SweepResult result;
  result.records.resize(tasks);

  pde::parallel_for(tasks, cfg.threads, [&](std::size_t idx) {
    const std::size_t n = cfg.n_values[idx / cfg.trials];
    const std::size_t trial = idx % cfg.trials;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const TrainRunResult run = train_single(cfg, data, n, trial);
      SweepRecord rec;
      rec.n = n;
      rec.trial = trial;
      rec.rel_error = run.test_error;
      rec.train_loss = run.report.final_train_loss;
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      result.records[idx] = rec;
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "run_sweep(" << cfg.problem << "): n=" << n << " trial=" << trial
         << " failed: " << e.what();
      throw std::runtime_error(os.str());
    }
  });

  for (std::size_t i = 0; i < cfg.n_values.size(); ++i) {
    double mean = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t)
      mean += result.records[i * cfg.trials + t].rel_error;
    mean /= static_cast<double>(cfg.trials);
    result.per_n_mean_error.emplace_back(cfg.n_values[i], mean);
  }

  result.fit.slope = std::numeric_limits<double>::quiet_NaN();
  result.fit.intercept = std::numeric_limits<double>::quiet_NaN();
  result.fit.r2 = std::numeric_limits<double>::quiet_NaN();
  if (result.per_n_mean_error.size() >= 3) {
    bool positive = true;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, err] : result.per_n_mean_error) {
      positive = positive && err > 0.0;
      pts.emplace_back(static_cast<double>(n), err);
    }
    if (positive) result.fit = fit_power_law(pts);
  }
  return result;
}

CompareResult compare_finetune(const ExperimentConfig& cfg,
                               const model::C2BNet& base) {
  if (!cfg.transfer_grid)
    throw ConfigError("compare_finetune: config has no transfer grid");
  const grids::Grid& tgrid = *cfg.transfer_grid;
  const pde::Dataset data = make_transfer_dataset(cfg);
  const pde::Dataset test_set =
      data.subset(data.size() - cfg.test_size, cfg.test_size);
  const grids::Quadrature q = grids::make_quadrature(tgrid);

  CompareResult result;
  for (std::size_t n : cfg.n_values) {
    const pde::Dataset train_set = data.subset(0, n);
    CompareRow row;
    row.n = n;
    row.trainable_params_finetune = base.d_low() * tgrid.size();

    {
      model::FinetuneOptions opt = cfg.finetune;
      opt.seed = Rng(cfg.seed).split(kFinetuneLabel).split(n).seed();
      model::FinetuneReport rep;
      const model::C2BNet tuned =
          model::finetune_gradient(base, train_set, opt, &rep);
      row.error_finetune_gradient =
          training::evaluate(tuned, test_set, cfg.metric).mean_rel_error;
      row.loss_finetune_gradient = rep.final_train_loss;
      row.wall_gradient_s = rep.wall_time_s;
    }
    {
      const auto t0 = std::chrono::steady_clock::now();
      const model::ExactFinetuneResult exact =
          model::finetune_exact(base, train_set);
      row.wall_exact_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      row.error_finetune_exact =
          training::evaluate(exact.net, test_set, cfg.metric).mean_rel_error;
      row.loss_finetune_exact = model::quadrature_loss(
          exact.net.forward_batch(train_set.inputs), train_set.outputs, q);
    }
    {
      const auto t0 = std::chrono::steady_clock::now();
      const std::uint64_t seed =
          Rng(cfg.seed).split(kRetrainLabel).split(n).seed();
      Rng rng(seed);
      model::C2BNet fresh =
          model::make_c2bnet(data.input_grid, tgrid, cfg.d_low, rng);
      row.trainable_params_retrain = nn::count_params(fresh.net());
      training::TrainConfig tc = cfg.train;
      tc.seed = seed;
      auto [trained, rep] = training::train(std::move(fresh), train_set, tc);
      row.error_retrain =
          training::evaluate(trained, test_set, cfg.metric).mean_rel_error;
      row.wall_retrain_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }
    result.rows.push_back(row);
  }
  return result;
}

SpectrumDiag estimate_projection_residual(const pde::Dataset& data,
                                          std::size_t d2) {
  if (data.size() < 2)
    throw std::invalid_argument("estimate_projection_residual: need n >= 2");
  const std::size_t D = data.outputs.cols();
  if (d2 > D)
    throw std::invalid_argument("estimate_projection_residual: d2 > output dim");

  const grids::Quadrature q = grids::make_quadrature(data.output_grid);
  const numkit::SpectrumResult spec =
      numkit::weighted_principal_spectrum(data.outputs, q.weights, d2);

  SpectrumDiag diag;
  diag.eigenvalues = spec.values;

  double total = 0.0;
  std::vector<double> coeff(d2);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* v = data.outputs.row(i);
    for (std::size_t c = 0; c < d2; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < D; ++j)
        acc += q.weights[j] * v[j] * spec.vectors(j, c);
      coeff[c] = acc;
    }
    double res2 = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      double proj = 0.0;
      for (std::size_t c = 0; c < d2; ++c) proj += coeff[c] * spec.vectors(j, c);
      const double r = v[j] - proj;
      res2 += q.weights[j] * r * r;
    }
    total += res2;
  }
  diag.zeta_rms = std::sqrt(total / static_cast<double>(data.size()));
  return diag;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_sweep_csv(const std::string& path, const ExperimentConfig& cfg,
                     const SweepResult& result) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "problem,n,trial,metric,value,wall_time_s\n";
  for (const SweepRecord& r : result.records)
    f << cfg.problem << ',' << r.n << ',' << r.trial << ','
      << grids::norm_name(cfg.metric) << ',' << format_double(r.rel_error)
      << ',' << format_double(r.wall_time_s) << '\n';
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "problem,n,trial,metric,value,wall_time_s")
    throw std::runtime_error("unexpected CSV header in " + path);

  SweepResult result;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string problem, n_s, trial_s, metric, value_s, wall_s;
    if (!std::getline(ss, problem, ',') || !std::getline(ss, n_s, ',') ||
        !std::getline(ss, trial_s, ',') || !std::getline(ss, metric, ',') ||
        !std::getline(ss, value_s, ',') || !std::getline(ss, wall_s, ','))
      throw std::runtime_error("malformed CSV row in " + path + ": " + line);
    SweepRecord rec;
    rec.n = std::stoull(n_s);
    rec.trial = std::stoull(trial_s);
    rec.rel_error = std::stod(value_s);
    rec.wall_time_s = std::stod(wall_s);
    result.records.push_back(rec);
  }

  // aggregate by n in record order
  std::vector<std::size_t> ns;
  for (const SweepRecord& r : result.records)
    if (ns.empty() || ns.back() != r.n) ns.push_back(r.n);
  for (std::size_t n : ns) {
    double mean = 0.0;
    std::size_t count = 0;
    for (const SweepRecord& r : result.records)
      if (r.n == n) {
        mean += r.rel_error;
        ++count;
      }
    result.per_n_mean_error.emplace_back(n, mean / static_cast<double>(count));
  }

  result.fit.slope = std::numeric_limits<double>::quiet_NaN();
  result.fit.intercept = std::numeric_limits<double>::quiet_NaN();
  result.fit.r2 = std::numeric_limits<double>::quiet_NaN();
  if (result.per_n_mean_error.size() >= 3) {
    bool positive = true;
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, err] : result.per_n_mean_error) {
      positive = positive && err > 0.0;
      pts.emplace_back(static_cast<double>(n), err);
    }
    if (positive) result.fit = fit_power_law(pts);
  }
  return result;
}

void write_decay_dat(const std::string& path, const SweepResult& result) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "# n mean_rel_error\n";
  for (const auto& [n, err] : result.per_n_mean_error)
    f << n << ' ' << format_double(err) << '\n';
}

void write_fit_csv(const std::string& path, const std::string& problem,
                   const PowerLawFit& fit) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "problem,slope,intercept,r2\n";
  f << problem << ',' << format_double(fit.slope) << ','
    << format_double(fit.intercept) << ',' << format_double(fit.r2) << '\n';
}

void write_compare_csv(const std::string& path, const ExperimentConfig& cfg,
                       const CompareResult& result) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "problem,n,method,metric,value,trainable_params,wall_time_s\n";
  for (const CompareRow& r : result.rows) {
    f << cfg.problem << ',' << r.n << ",finetune_gradient,"
      << grids::norm_name(cfg.metric) << ','
      << format_double(r.error_finetune_gradient) << ','
      << r.trainable_params_finetune << ',' << format_double(r.wall_gradient_s)
      << '\n';
    f << cfg.problem << ',' << r.n << ",finetune_exact,"
      << grids::norm_name(cfg.metric) << ','
      << format_double(r.error_finetune_exact) << ','
      << r.trainable_params_finetune << ',' << format_double(r.wall_exact_s)
      << '\n';
    f << cfg.problem << ',' << r.n << ",retrain,"
      << grids::norm_name(cfg.metric) << ',' << format_double(r.error_retrain)
      << ',' << r.trainable_params_retrain << ','
      << format_double(r.wall_retrain_s) << '\n';
  }
}

std::size_t count_mean_error_inversions(const SweepResult& result) {
  std::size_t inversions = 0;
  for (std::size_t i = 1; i < result.per_n_mean_error.size(); ++i)
    if (result.per_n_mean_error[i].second > result.per_n_mean_error[i - 1].second)
      ++inversions;
  return inversions;
}

} // namespace c2bnet::harness
