#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "c2bnet/pde.hpp"

namespace c2bnet::pde {

using grids::GridKind;
using grids::NodePlacement;

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::size_t nearest_axis_index(double x, double lo, double hi, std::size_t n,
                               NodePlacement placement) {
  double pos;
  if (placement == NodePlacement::endpoints_included) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    pos = (x - lo) / h;
  } else {
    const double h = (hi - lo) / static_cast<double>(n);
    pos = (x - lo) / h - 0.5;
  }
  const long idx = std::lround(pos);
  return static_cast<std::size_t>(
      std::clamp(idx, 0L, static_cast<long>(n - 1)));
}

} // namespace

DiscreteField restrict_nearest(const DiscreteField& fine, const Grid& target) {
  const Grid& fg = fine.grid;
  if (fg.kind != target.kind)
    throw std::invalid_argument("restrict_nearest: grid kind mismatch");

  DiscreteField out{target, std::vector<double>(target.size())};
  switch (target.kind) {
    case GridKind::line1d: {
      for (std::size_t k = 0; k < target.size(); ++k) {
        const double x = target.coord1d(k);
        out.values[k] =
            fine.values[nearest_axis_index(x, fg.a, fg.b, fg.n, fg.placement)];
      }
      return out;
    }
    case GridKind::rect2d: {
      for (std::size_t k = 0; k < target.size(); ++k) {
        double x, y;
        target.coord2d(k, x, y);
        const std::size_t ix =
            nearest_axis_index(x, fg.ax, fg.bx, fg.nx, fg.placement);
        const std::size_t iy =
            nearest_axis_index(y, fg.ay, fg.by, fg.ny, fg.placement);
        out.values[k] = fine.values[iy * fg.nx + ix];
      }
      return out;
    }
    case GridKind::angular_product: {
      if (fg.n_dirs != target.n_dirs)
        throw std::invalid_argument("restrict_nearest: direction count mismatch");
      const std::size_t fine_spatial = fg.spatial_size();
      const std::size_t tgt_spatial = target.spatial_size();
      for (std::size_t d = 0; d < target.n_dirs; ++d) {
        for (std::size_t s = 0; s < tgt_spatial; ++s) {
          double x, y;
          target.coord2d(s, x, y);
          const std::size_t ix =
              nearest_axis_index(x, fg.ax, fg.bx, fg.nx, fg.placement);
          const std::size_t iy =
              nearest_axis_index(y, fg.ay, fg.by, fg.ny, fg.placement);
          out.values[d * tgt_spatial + s] =
              fine.values[d * fine_spatial + iy * fg.nx + ix];
        }
      }
      return out;
    }
  }
  throw std::invalid_argument("restrict_nearest: unknown grid kind");
}

std::vector<double> cell_average_sigma(const RteSigma& s, const Grid& grid) {
  if (grid.kind != GridKind::rect2d ||
      grid.placement != NodePlacement::cell_centered)
    throw std::invalid_argument(
        "cell_average_sigma: expected a cell-centered rect2d grid");
  const double hx = (grid.bx - grid.ax) / static_cast<double>(grid.nx);
  const double hy = (grid.by - grid.ay) / static_cast<double>(grid.ny);
  const double cell_area = hx * hy;

  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double xc, yc;
    grid.coord2d(k, xc, yc);
    const double x0 = xc - 0.5 * hx, x1 = xc + 0.5 * hx;
    const double y0 = yc - 0.5 * hy, y1 = yc + 0.5 * hy;
    double overlap = 0.0; // channels are disjoint, so overlaps just add
    for (std::size_t r = 0; r < 5; ++r) {
      const double cy0 = RteSigma::centers[r] - 0.5 * s.width[r];
      const double cy1 = RteSigma::centers[r] + 0.5 * s.width[r];
      const double ox = std::max(0.0, std::min(x1, s.length[r]) - std::max(x0, 0.0));
      const double oy = std::max(0.0, std::min(y1, cy1) - std::max(y0, cy0));
      overlap += ox * oy;
    }
    out[k] = s.sigma_lo + (s.sigma_hi - s.sigma_lo) * (overlap / cell_area);
  }
  return out;
}

Grid default_input_grid(const std::string& problem) {
  if (problem == "elliptic")
    return Grid::rect2d(10, 10, NodePlacement::cell_centered);
  if (problem == "heat")
    return Grid::line1d(0.0, 2.0, 64, NodePlacement::endpoints_included);
  if (problem == "rte")
    return Grid::angular_product(
        Grid::rect2d(11, 11, NodePlacement::endpoints_included), 4);
  if (problem == "synthetic")
    return Grid::line1d(0.0, 1.0, 8, NodePlacement::endpoints_included);
  throw std::invalid_argument("unknown problem tag: " + problem);
}

Grid default_output_grid(const std::string& problem) {
  if (problem == "elliptic")
    return Grid::rect2d(10, 10, NodePlacement::cell_centered);
  if (problem == "heat")
    return Grid::line1d(0.0, 2.0, 64, NodePlacement::endpoints_included);
  if (problem == "rte")
    return Grid::rect2d(10, 10, NodePlacement::cell_centered);
  if (problem == "synthetic")
    return Grid::line1d(0.0, 1.0, 6, NodePlacement::endpoints_included);
  throw std::invalid_argument("unknown problem tag: " + problem);
}

Dataset Dataset::subset(std::size_t begin, std::size_t count) const {
  if (begin + count > size())
    throw std::invalid_argument("Dataset::subset: range out of bounds");
  Dataset d;
  d.problem = problem;
  d.input_grid = input_grid;
  d.output_grid = output_grid;
  d.master_seed = master_seed;
  d.noise_sigma = noise_sigma;
  d.inputs = Matrix(count, inputs.cols());
  d.outputs = Matrix(count, outputs.cols());
  for (std::size_t i = 0; i < count; ++i) {
    d.inputs.set_row(i, inputs.row_copy(begin + i));
    d.outputs.set_row(i, outputs.row_copy(begin + i));
    d.sample_seeds.push_back(sample_seeds[begin + i]);
  }
  return d;
}

void add_noise(Matrix& outputs, double sigma, Rng& rng) {
  if (sigma == 0.0) return;
  for (std::size_t i = 0; i < outputs.size(); ++i)
    outputs.data()[i] += sigma * rng.normal();
}

Dataset generate_dataset(const std::string& problem, std::size_t n,
                         std::uint64_t master_seed, double noise_sigma,
                         const Grid& output_grid, const GenOptions& opt) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");

  Dataset ds;
  ds.problem = problem;
  ds.input_grid = default_input_grid(problem);
  ds.output_grid = output_grid;
  ds.master_seed = master_seed;
  ds.noise_sigma = noise_sigma;
  ds.inputs = Matrix(n, ds.input_grid.size());
  ds.outputs = Matrix(n, ds.output_grid.size());
  ds.sample_seeds.resize(n);

  const Rng root(master_seed);
  for (std::size_t i = 0; i < n; ++i)
    ds.sample_seeds[i] = root.split(i).seed();

  auto make_sample = [&](std::size_t i) {
    try {
      Rng rng = root.split(i);
      std::vector<double> in_row, out_row;

      if (problem == "elliptic") {
        const EllipticParams params = sample_elliptic_kappa(rng);
        const Field2d kappa = elliptic_kappa(params);
        const Field2d f = [](double, double) { return 1.0; };
        const DiscreteField sol = solve_elliptic(kappa, f, opt.elliptic_cells);
        in_row = restrict_nearest(sol, ds.input_grid).values;
        out_row = grids::sample_on_grid(kappa, ds.output_grid).values;
      } else if (problem == "heat") {
        const HeatIC ic = sample_heat_ic(rng);
        const Field1d u0 = heat_initial_condition(ic);
        const DiscreteField sol =
            solve_heat(u0, opt.heat_T, opt.heat_intervals, opt.heat_steps);
        in_row = restrict_nearest(sol, ds.input_grid).values;
        out_row = grids::sample_on_grid(u0, ds.output_grid).values;
      } else if (problem == "rte") {
        const RteSigma params = sample_rte_sigma(rng);
        const Field2d sigma = rte_sigma_field(params);
        const DiscreteField sol =
            solve_rte_left_lit(sigma, opt.rte_inflow, opt.rte_cells);
        in_row = restrict_nearest(sol, ds.input_grid).values;
        // the coarse parameter is the exact per-cell average: pointwise
        // sampling cannot see channels thinner than the cell spacing
        out_row = cell_average_sigma(params, ds.output_grid);
      } else if (problem == "synthetic") {
        in_row.assign(ds.input_grid.size(), 0.5);
        out_row.resize(ds.output_grid.size());
        for (std::size_t j = 0; j < out_row.size(); ++j)
          out_row[j] = 1.0 + 0.1 * static_cast<double>(j);
      } else {
        throw std::invalid_argument("unknown problem tag: " + problem);
      }

      if (noise_sigma != 0.0) {
        for (double& v : out_row) v += noise_sigma * rng.normal();
      }
      for (double v : in_row)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite input value");
      for (double v : out_row)
        if (!std::isfinite(v)) throw std::runtime_error("non-finite output value");

      ds.inputs.set_row(i, in_row);
      ds.outputs.set_row(i, out_row);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "generate_dataset(" << problem << "): sample " << i
         << " failed: " << e.what();
      throw std::runtime_error(os.str());
    }
  };

  parallel_for(n, opt.threads, make_sample);
  return ds;
}

} // namespace c2bnet::pde
