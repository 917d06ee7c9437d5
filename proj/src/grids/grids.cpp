#include "c2bnet/grids.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "c2bnet/kernels.hpp"

namespace c2bnet::grids {

namespace k = c2bnet::kernels;

Grid Grid::line1d(double a, double b, std::size_t n, NodePlacement placement) {
  if (n < 2) throw std::invalid_argument("line1d: n must be >= 2");
  if (!(b > a)) throw std::invalid_argument("line1d: empty interval");
  Grid g;
  g.kind = GridKind::line1d;
  g.placement = placement;
  g.a = a;
  g.b = b;
  g.n = n;
  return g;
}

Grid Grid::rect2d(std::size_t nx, std::size_t ny, NodePlacement placement,
                  double ax, double bx, double ay, double by) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("rect2d: nx, ny must be >= 2");
  if (!(bx > ax) || !(by > ay)) throw std::invalid_argument("rect2d: empty box");
  Grid g;
  g.kind = GridKind::rect2d;
  g.placement = placement;
  g.nx = nx;
  g.ny = ny;
  g.ax = ax;
  g.bx = bx;
  g.ay = ay;
  g.by = by;
  return g;
}

Grid Grid::angular_product(const Grid& spatial, std::size_t n_dirs) {
  if (spatial.kind != GridKind::rect2d)
    throw std::invalid_argument("angular_product: spatial grid must be rect2d");
  if (n_dirs < 1) throw std::invalid_argument("angular_product: n_dirs must be >= 1");
  Grid g = spatial;
  g.kind = GridKind::angular_product;
  g.n_dirs = n_dirs;
  return g;
}

std::size_t Grid::spatial_size() const {
  switch (kind) {
    case GridKind::line1d:
      return n;
    case GridKind::rect2d:
    case GridKind::angular_product:
      return nx * ny;
  }
  return 0;
}

std::size_t Grid::size() const {
  return kind == GridKind::angular_product ? spatial_size() * n_dirs
                                           : spatial_size();
}

double Grid::volume() const {
  switch (kind) {
    case GridKind::line1d:
      return b - a;
    case GridKind::rect2d:
    case GridKind::angular_product:
      return (bx - ax) * (by - ay);
  }
  return 0.0;
}

namespace {

double axis_coord(double lo, double hi, std::size_t n, NodePlacement placement,
                  std::size_t i) {
  if (placement == NodePlacement::endpoints_included) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    return lo + static_cast<double>(i) * h;
  }
  const double h = (hi - lo) / static_cast<double>(n);
  return lo + (static_cast<double>(i) + 0.5) * h;
}

} // namespace

double Grid::coord1d(std::size_t kidx) const {
  if (kind != GridKind::line1d)
    throw std::invalid_argument("coord1d: not a line grid");
  return axis_coord(a, b, n, placement, kidx);
}

void Grid::coord2d(std::size_t kidx, double& x, double& y) const {
  if (kind == GridKind::line1d)
    throw std::invalid_argument("coord2d: not a 2-D grid");
  const std::size_t s = kidx % spatial_size();
  const std::size_t ix = s % nx;
  const std::size_t iy = s / nx;
  x = axis_coord(ax, bx, nx, placement, ix);
  y = axis_coord(ay, by, ny, placement, iy);
}

std::size_t Grid::direction_of(std::size_t kidx) const {
  if (kind != GridKind::angular_product)
    throw std::invalid_argument("direction_of: not an angular grid");
  return kidx / spatial_size();
}

bool Grid::same_as(const Grid& other) const {
  if (kind != other.kind || placement != other.placement) return false;
  switch (kind) {
    case GridKind::line1d:
      return a == other.a && b == other.b && n == other.n;
    case GridKind::rect2d:
      return nx == other.nx && ny == other.ny && ax == other.ax &&
             bx == other.bx && ay == other.ay && by == other.by;
    case GridKind::angular_product:
      return nx == other.nx && ny == other.ny && ax == other.ax &&
             bx == other.bx && ay == other.ay && by == other.by &&
             n_dirs == other.n_dirs;
  }
  return false;
}

std::string Grid::describe() const {
  std::ostringstream os;
  const char* pl =
      placement == NodePlacement::endpoints_included ? "endpoints" : "cells";
  switch (kind) {
    case GridKind::line1d:
      os << "line1d[" << a << "," << b << "]x" << n << "(" << pl << ")";
      break;
    case GridKind::rect2d:
      os << "rect2d " << nx << "x" << ny << "(" << pl << ")";
      break;
    case GridKind::angular_product:
      os << "angular " << nx << "x" << ny << "x" << n_dirs << "(" << pl << ")";
      break;
  }
  return os.str();
}

namespace {

std::vector<double> axis_weights(double lo, double hi, std::size_t n,
                                 NodePlacement placement) {
  std::vector<double> w(n);
  if (placement == NodePlacement::endpoints_included) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) w[i] = h;
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
  } else {
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = h;
  }
  return w;
}

} // namespace

Quadrature make_quadrature(const Grid& grid) {
  Quadrature q;
  switch (grid.kind) {
    case GridKind::line1d:
      q.weights = axis_weights(grid.a, grid.b, grid.n, grid.placement);
      return q;
    case GridKind::rect2d:
    case GridKind::angular_product: {
      const auto wx = axis_weights(grid.ax, grid.bx, grid.nx, grid.placement);
      const auto wy = axis_weights(grid.ay, grid.by, grid.ny, grid.placement);
      std::vector<double> spatial(grid.nx * grid.ny);
      for (std::size_t iy = 0; iy < grid.ny; ++iy)
        for (std::size_t ix = 0; ix < grid.nx; ++ix)
          spatial[iy * grid.nx + ix] = wx[ix] * wy[iy];
      if (grid.kind == GridKind::rect2d) {
        q.weights = std::move(spatial);
        return q;
      }
      const double dir_w = 1.0 / static_cast<double>(grid.n_dirs);
      q.weights.resize(spatial.size() * grid.n_dirs);
      for (std::size_t d = 0; d < grid.n_dirs; ++d)
        for (std::size_t s = 0; s < spatial.size(); ++s)
          q.weights[d * spatial.size() + s] = spatial[s] * dir_w;
      return q;
    }
  }
  throw std::invalid_argument("make_quadrature: unknown grid kind");
}

double inner_product(const DiscreteField& u, const DiscreteField& v,
                     const Quadrature& q) {
  if (!u.grid.same_as(v.grid))
    throw std::invalid_argument("inner_product: grid mismatch");
  if (u.values.size() != q.weights.size() || v.values.size() != q.weights.size())
    throw std::invalid_argument("inner_product: size mismatch");
  return k::table().weighted_dot(q.weights.data(), u.values.data(),
                                 v.values.data(), q.weights.size());
}

double relative_error(const DiscreteField& pred, const DiscreteField& truth,
                      const Quadrature& q, Norm norm) {
  if (!pred.grid.same_as(truth.grid))
    throw std::invalid_argument("relative_error: grid mismatch");
  const std::size_t n = q.weights.size();
  if (pred.values.size() != n || truth.values.size() != n)
    throw std::invalid_argument("relative_error: size mismatch");

  if (norm == Norm::l2) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = pred.values[i] - truth.values[i];
      num += q.weights[i] * e * e;
      den += q.weights[i] * truth.values[i] * truth.values[i];
    }
    if (den == 0.0)
      throw std::invalid_argument("relative_error: zero-norm truth");
    return std::sqrt(num) / std::sqrt(den);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += q.weights[i] * std::abs(pred.values[i] - truth.values[i]);
    den += q.weights[i] * std::abs(truth.values[i]);
  }
  if (den == 0.0) throw std::invalid_argument("relative_error: zero-norm truth");
  return num / den;
}

DiscreteField sample_on_grid(const std::function<double(double)>& f,
                             const Grid& grid) {
  if (grid.kind != GridKind::line1d)
    throw std::invalid_argument("sample_on_grid: expected a line grid");
  DiscreteField field{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.coord1d(i);
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "sample_on_grid: non-finite value at x=" << x;
      throw std::runtime_error(os.str());
    }
    field.values[i] = v;
  }
  return field;
}

DiscreteField sample_on_grid(const std::function<double(double, double)>& f,
                             const Grid& grid) {
  if (grid.kind != GridKind::rect2d)
    throw std::invalid_argument("sample_on_grid: expected a rect2d grid");
  DiscreteField field{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x, y;
    grid.coord2d(i, x, y);
    const double v = f(x, y);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "sample_on_grid: non-finite value at (" << x << "," << y << ")";
      throw std::runtime_error(os.str());
    }
    field.values[i] = v;
  }
  return field;
}

const char* norm_name(Norm n) { return n == Norm::l1 ? "l1" : "l2"; }

Norm norm_from_name(const std::string& name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  throw std::invalid_argument("unknown norm: " + name);
}

} // namespace c2bnet::grids
