#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "c2bnet/grids.hpp"
#include "c2bnet/matrix.hpp"
#include "c2bnet/rng.hpp"

namespace c2bnet::pde {

using grids::DiscreteField;
using grids::Grid;
using numkit::Matrix;
using numkit::Rng;

using Field2d = std::function<double(double, double)>;
using Field1d = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Permeability inversion: -div(kappa grad u) = f on [0,1]^2, u = 0 on the
// boundary. kappa is a 4-parameter trigonometric family, bounded away from 0.
// ---------------------------------------------------------------------------

struct EllipticParams {
  std::array<double, 4> w; // each in [-1, 1]
};

/// kappa(x,y) = w1 sin(x+y) + w2 cos(x+y) + w3 sin(2(x+y)) + w4 cos(2(x+y)) + 4.1
Field2d elliptic_kappa(const EllipticParams& p);
EllipticParams sample_elliptic_kappa(Rng& rng);

/// Flux-form 5-point finite differences with arithmetic face averaging of
/// kappa, homogeneous Dirichlet data, conjugate gradient to `cg_tol` relative
/// residual. Returns the solution on the full (cells+1)^2 endpoint node grid
/// (boundary rows are exact zeros).
DiscreteField solve_elliptic(const Field2d& kappa, const Field2d& f,
                             std::size_t cells, double cg_tol = 1e-10,
                             std::size_t max_iter = 100000);

// ---------------------------------------------------------------------------
// Initial-condition inversion for u_t - u_xx = 0 on [0,2] x [0, T].
// ---------------------------------------------------------------------------

struct HeatIC {
  std::array<double, 3> w; // sin weights
  std::array<double, 3> p; // cos weights
};

/// u0(x) = sum_i w_i sin(i pi x) + p_i cos(i pi x)
Field1d heat_initial_condition(const HeatIC& ic);
HeatIC sample_heat_ic(Rng& rng);

/// Crank-Nicolson with Dirichlet values frozen at u0(0) and u0(2); returns
/// the terminal solution on the (intervals+1)-node endpoint grid.
DiscreteField solve_heat(const Field1d& u0, double T,
                         std::size_t intervals = 504, std::size_t steps = 100);

// ---------------------------------------------------------------------------
// Scattering-parameter inversion for the radiative transfer equation
//   s·grad I(x,s) = sigma(x) ( (1/n_dirs) Σ_j I(x, s_j) - I(x,s) )
// on [0,1]^2 with 4 ordinate directions at angles pi/4 + j pi/2.
// The angular integral is the directional average, so a constant isotropic
// field is an exact fixed point; this normalization is intentional and must
// not be changed to the raw (un-normalized) integral.
// ---------------------------------------------------------------------------

struct RteSigma {
  std::array<double, 5> length; // channel r occupies x in [0, length[r]]
  std::array<double, 5> width;  // and y in [center[r] +/- width[r]/2]
  double sigma_lo = 0.4;
  double sigma_hi = 1.0;

  static constexpr std::array<double, 5> centers{0.1, 0.3, 0.5, 0.7, 0.9};
  static constexpr std::size_t intrinsic_dof = 10; // 5 channels x (length, width)

  double channel_area() const;
};

Field2d rte_sigma_field(const RteSigma& s);
RteSigma sample_rte_sigma(Rng& rng);

/// Per-node boundary values for inflow directions: (x, y, direction) -> I.
using RteBoundary = std::function<double(double, double, std::size_t)>;

/// First-order upwind sweeps with source iteration (fixed point on the
/// scattering source), converged when successive iterates differ by less
/// than `tol` in sup norm. Returns I on the angular product of the
/// (cells+1)^2 endpoint node grid with the 4 ordinate directions.
/// Throws std::runtime_error if max_sweeps source iterations do not converge.
DiscreteField solve_rte(const Field2d& sigma, const RteBoundary& inflow,
                        std::size_t cells, double tol = 1e-10,
                        std::size_t max_sweeps = 10000);

/// Left boundary lit at I_in for directions with s_x > 0, all other inflow
/// boundaries dark.
DiscreteField solve_rte_left_lit(const Field2d& sigma, double I_in,
                                 std::size_t cells, double tol = 1e-10,
                                 std::size_t max_sweeps = 10000);

/// Ordinate direction vectors (unit, angles pi/4 + j pi/2).
std::array<std::array<double, 2>, 4> rte_directions();

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Dataset {
  std::string problem;
  Matrix inputs;  // n x D1, one discretized PDE solution per row
  Matrix outputs; // n x D2, the discretized parameter (+ optional noise)
  Grid input_grid;
  Grid output_grid;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> sample_seeds;
  double noise_sigma = 0.0;

  std::size_t size() const { return inputs.rows(); }
  Dataset subset(std::size_t begin, std::size_t count) const;
};

struct GenOptions {
  std::size_t elliptic_cells = 64;
  std::size_t heat_intervals = 504;
  std::size_t heat_steps = 100;
  double heat_T = 0.01;
  std::size_t rte_cells = 64;
  double rte_inflow = 1.0;
  std::size_t threads = 0; // 0 = hardware concurrency
};

/// Input observation grid used for a problem tag.
Grid default_input_grid(const std::string& problem);
/// Output (parameter) grid used for a problem tag at base resolution.
Grid default_output_grid(const std::string& problem);

/// Generates n samples: per-sample generator split from the master seed,
/// forward solve, observation restriction, parameter discretization, optional
/// iid N(0, noise_sigma^2) noise per output node. Sample order is fixed by
/// index regardless of thread count. Throws with the offending sample index
/// if a solver fails or produces non-finite values.
Dataset generate_dataset(const std::string& problem, std::size_t n,
                         std::uint64_t master_seed, double noise_sigma,
                         const Grid& output_grid, const GenOptions& opt = {});

/// Adds iid Gaussian noise per node (the generate_dataset noise path).
void add_noise(Matrix& outputs, double sigma, Rng& rng);

/// Pointwise nearest-node restriction between compatible grid kinds
/// (per-direction spatial restriction for angular grids).
DiscreteField restrict_nearest(const DiscreteField& fine, const Grid& target);

/// Exact per-cell average of sigma on a cell-centered rect2d grid (rectangle
/// overlap arithmetic; channels never overlap each other).
std::vector<double> cell_average_sigma(const RteSigma& s, const Grid& grid);

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

} // namespace c2bnet::pde
