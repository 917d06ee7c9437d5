#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "c2bnet/pde.hpp"

namespace c2bnet::pde {

double RteSigma::channel_area() const {
  double area = 0.0;
  for (std::size_t r = 0; r < 5; ++r) area += length[r] * width[r];
  return area;
}

Field2d rte_sigma_field(const RteSigma& s) {
  return [s](double x, double y) {
    for (std::size_t r = 0; r < 5; ++r) {
      const double half = 0.5 * s.width[r];
      if (x >= 0.0 && x <= s.length[r] && y >= RteSigma::centers[r] - half &&
          y <= RteSigma::centers[r] + half)
        return s.sigma_hi;
    }
    return s.sigma_lo;
  };
}

RteSigma sample_rte_sigma(Rng& rng) {
  RteSigma s;
  for (std::size_t r = 0; r < 5; ++r) {
    s.length[r] = rng.uniform(0.3, 1.0);
    // width range keeps channels disjoint (centerlines 0.2 apart) while
    // staying resolvable on the 10x10 parameter cells and in the transport
    // observations; sub-cell widths are unrecoverable from either side
    s.width[r] = rng.uniform(0.05, 0.15);
  }
  return s;
}

std::array<std::array<double, 2>, 4> rte_directions() {
  // angles pi/4 + j pi/2: every ordinate has nonzero components along both
  // axes, and two of the four see the lit left boundary
  std::array<std::array<double, 2>, 4> dirs;
  for (std::size_t j = 0; j < 4; ++j) {
    const double theta =
        std::numbers::pi / 4.0 + static_cast<double>(j) * std::numbers::pi / 2.0;
    dirs[j] = {std::cos(theta), std::sin(theta)};
  }
  return dirs;
}

DiscreteField solve_rte(const Field2d& sigma, const RteBoundary& inflow,
                        std::size_t cells, double tol, std::size_t max_sweeps) {
  const std::size_t n = cells;
  const std::size_t nn = n + 1; // nodes per axis
  const double h = 1.0 / static_cast<double>(n);
  const auto dirs = rte_directions();

  std::vector<double> sig(nn * nn);
  for (std::size_t j = 0; j < nn; ++j)
    for (std::size_t i = 0; i < nn; ++i)
      sig[j * nn + i] =
          sigma(static_cast<double>(i) * h, static_cast<double>(j) * h);
  for (double v : sig)
    if (!(v >= 0.0))
      throw std::invalid_argument("solve_rte: sigma must be nonnegative");

  // I[d][node], mean scattering field phi
  std::vector<std::vector<double>> I(4, std::vector<double>(nn * nn, 0.0));
  std::vector<double> phi(nn * nn, 0.0);

  auto node = [nn](std::size_t i, std::size_t j) { return j * nn + i; };

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t s = 0; s < nn * nn; ++s)
      phi[s] = 0.25 * (I[0][s] + I[1][s] + I[2][s] + I[3][s]);

    double max_change = 0.0;
    for (std::size_t d = 0; d < 4; ++d) {
      const double sx = dirs[d][0];
      const double sy = dirs[d][1];
      const double ax = std::abs(sx) / h;
      const double ay = std::abs(sy) / h;
      const bool has_x = ax > 0.0;
      const bool has_y = ay > 0.0;
      const bool xpos = sx > 0.0;
      const bool ypos = sy > 0.0;

      for (std::size_t jj = 0; jj < nn; ++jj) {
        const std::size_t j = ypos ? jj : nn - 1 - jj;
        for (std::size_t ii = 0; ii < nn; ++ii) {
          const std::size_t i = xpos ? ii : nn - 1 - ii;
          const std::size_t idx = node(i, j);
          double value;
          const bool on_x_inflow = has_x && (xpos ? (i == 0) : (i == n));
          const bool on_y_inflow = has_y && (ypos ? (j == 0) : (j == n));
          if (on_x_inflow || on_y_inflow) {
            value = inflow(static_cast<double>(i) * h,
                           static_cast<double>(j) * h, d);
          } else {
            const double up_x =
                has_x ? I[d][node(xpos ? i - 1 : i + 1, j)] : 0.0;
            const double up_y =
                has_y ? I[d][node(i, ypos ? j - 1 : j + 1)] : 0.0;
            const double source = sig[idx] * phi[idx];
            value = (source + ax * up_x + ay * up_y) / (sig[idx] + ax + ay);
          }
          max_change = std::max(max_change, std::abs(value - I[d][idx]));
          I[d][idx] = value;
        }
      }
    }
    if (max_change < tol) {
      DiscreteField field;
      field.grid = Grid::angular_product(
          Grid::rect2d(nn, nn, grids::NodePlacement::endpoints_included), 4);
      field.values.resize(4 * nn * nn);
      for (std::size_t d = 0; d < 4; ++d)
        for (std::size_t s = 0; s < nn * nn; ++s)
          field.values[d * nn * nn + s] = I[d][s];
      return field;
    }
  }
  std::ostringstream os;
  os << "solve_rte: source iteration did not converge within " << max_sweeps
     << " sweeps";
  throw std::runtime_error(os.str());
}

DiscreteField solve_rte_left_lit(const Field2d& sigma, double I_in,
                                 std::size_t cells, double tol,
                                 std::size_t max_sweeps) {
  const auto dirs = rte_directions();
  auto inflow = [I_in, dirs](double x, double /*y*/, std::size_t d) {
    return (x == 0.0 && dirs[d][0] > 0.0) ? I_in : 0.0;
  };
  return solve_rte(sigma, inflow, cells, tol, max_sweeps);
}

} // namespace c2bnet::pde
