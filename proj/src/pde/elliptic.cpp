#include <cmath>
#include <vector>

#include "c2bnet/linalg.hpp"
#include "c2bnet/pde.hpp"

namespace c2bnet::pde {

Field2d elliptic_kappa(const EllipticParams& p) {
  const auto w = p.w;
  return [w](double x, double y) {
    const double s = x + y;
    return w[0] * std::sin(s) + w[1] * std::cos(s) + w[2] * std::sin(2.0 * s) +
           w[3] * std::cos(2.0 * s) + 4.1;
  };
}

EllipticParams sample_elliptic_kappa(Rng& rng) {
  EllipticParams p;
  for (double& wi : p.w) wi = rng.uniform(-1.0, 1.0);
  return p;
}

DiscreteField solve_elliptic(const Field2d& kappa, const Field2d& f,
                             std::size_t cells, double cg_tol,
                             std::size_t max_iter) {
  const std::size_t n = cells;      // intervals per axis
  const std::size_t m = n - 1;      // interior nodes per axis
  const double h = 1.0 / static_cast<double>(n);

  // nodal kappa on the full grid; faces take the arithmetic neighbor average
  std::vector<double> kap((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      kap[j * (n + 1) + i] =
          kappa(static_cast<double>(i) * h, static_cast<double>(j) * h);

  auto kap_at = [&](std::size_t i, std::size_t j) { return kap[j * (n + 1) + i]; };

  // face coefficients for interior unknown (i,j), 1-based in the full grid
  std::vector<double> aw(m * m), ae(m * m), as(m * m), an(m * m);
  for (std::size_t j = 1; j <= m; ++j) {
    for (std::size_t i = 1; i <= m; ++i) {
      const std::size_t idx = (j - 1) * m + (i - 1);
      aw[idx] = 0.5 * (kap_at(i, j) + kap_at(i - 1, j));
      ae[idx] = 0.5 * (kap_at(i, j) + kap_at(i + 1, j));
      as[idx] = 0.5 * (kap_at(i, j) + kap_at(i, j - 1));
      an[idx] = 0.5 * (kap_at(i, j) + kap_at(i, j + 1));
    }
  }

  const double inv_h2 = 1.0 / (h * h);
  auto apply = [&](const numkit::Vector& u, numkit::Vector& out) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t idx = j * m + i;
        const double uc = u[idx];
        const double uw = (i > 0) ? u[idx - 1] : 0.0;
        const double ue = (i + 1 < m) ? u[idx + 1] : 0.0;
        const double us = (j > 0) ? u[idx - m] : 0.0;
        const double un = (j + 1 < m) ? u[idx + m] : 0.0;
        out[idx] = inv_h2 * (aw[idx] * (uc - uw) + ae[idx] * (uc - ue) +
                             as[idx] * (uc - us) + an[idx] * (uc - un));
      }
    }
  };

  numkit::Vector rhs(m * m);
  for (std::size_t j = 1; j <= m; ++j)
    for (std::size_t i = 1; i <= m; ++i)
      rhs[(j - 1) * m + (i - 1)] =
          f(static_cast<double>(i) * h, static_cast<double>(j) * h);

  const numkit::CgResult cg = numkit::conjugate_gradient(apply, rhs, cg_tol, max_iter);

  DiscreteField field;
  field.grid = Grid::rect2d(n + 1, n + 1, grids::NodePlacement::endpoints_included);
  field.values.assign((n + 1) * (n + 1), 0.0);
  for (std::size_t j = 1; j <= m; ++j)
    for (std::size_t i = 1; i <= m; ++i)
      field.values[j * (n + 1) + i] = cg.x[(j - 1) * m + (i - 1)];
  return field;
}

} // namespace c2bnet::pde
