#include <cmath>
#include <numbers>
#include <stdexcept>

#include "c2bnet/linalg.hpp"
#include "c2bnet/pde.hpp"

namespace c2bnet::pde {

Field1d heat_initial_condition(const HeatIC& ic) {
  const auto w = ic.w;
  const auto p = ic.p;
  return [w, p](double x) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double arg = (i + 1) * std::numbers::pi * x;
      v += w[i] * std::sin(arg) + p[i] * std::cos(arg);
    }
    return v;
  };
}

HeatIC sample_heat_ic(Rng& rng) {
  HeatIC ic;
  for (double& wi : ic.w) wi = rng.uniform(-1.0, 1.0);
  for (double& pi : ic.p) pi = rng.uniform(-1.0, 1.0);
  return ic;
}

DiscreteField solve_heat(const Field1d& u0, double T, std::size_t intervals,
                         std::size_t steps) {
  if (!(T > 0.0)) throw std::invalid_argument("solve_heat: T must be > 0");
  const std::size_t n = intervals;
  const std::size_t m = n - 1; // interior unknowns
  const double a = 0.0, b = 2.0;
  const double h = (b - a) / static_cast<double>(n);
  const double dt = T / static_cast<double>(steps);
  const double r = dt / (2.0 * h * h); // Crank-Nicolson half-weight

  const double left = u0(a);
  const double right = u0(b);

  numkit::Vector u(m);
  for (std::size_t i = 0; i < m; ++i)
    u[i] = u0(a + static_cast<double>(i + 1) * h);

  // (I + r L) u^{k+1} = (I - r L) u^k + boundary terms, L = -d2/dx2 stencil
  const numkit::Vector lower(m - 1, -r);
  const numkit::Vector upper(m - 1, -r);
  const numkit::Vector diag(m, 1.0 + 2.0 * r);

  numkit::Vector rhs(m);
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t i = 0; i < m; ++i) {
      const double ul = (i > 0) ? u[i - 1] : left;
      const double ur = (i + 1 < m) ? u[i + 1] : right;
      rhs[i] = (1.0 - 2.0 * r) * u[i] + r * (ul + ur);
    }
    // time-constant Dirichlet data contributes on the implicit side too
    rhs[0] += r * left;
    rhs[m - 1] += r * right;
    u = numkit::thomas_solve(lower, diag, upper, rhs);
  }

  DiscreteField field;
  field.grid = Grid::line1d(a, b, n + 1, grids::NodePlacement::endpoints_included);
  field.values.assign(n + 1, 0.0);
  field.values[0] = left;
  field.values[n] = right;
  for (std::size_t i = 0; i < m; ++i) field.values[i + 1] = u[i];
  return field;
}

} // namespace c2bnet::pde
