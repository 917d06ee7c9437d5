#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace c2bnet::grids {

enum class NodePlacement { endpoints_included, cell_centered };

enum class GridKind { line1d, rect2d, angular_product };

/// Discretization grid. Three kinds:
///   line1d          n nodes on [a, b]
///   rect2d          nx × ny nodes on [ax,bx] × [ay,by], x fastest
///   angular_product rect2d spatial nodes × n_dirs directions, direction-major
///                   (all spatial nodes of direction 0, then direction 1, ...)
struct Grid {
  GridKind kind = GridKind::line1d;
  NodePlacement placement = NodePlacement::endpoints_included;

  // line1d
  double a = 0.0, b = 1.0;
  std::size_t n = 2;

  // rect2d
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
  std::size_t nx = 2, ny = 2;

  // angular_product
  std::size_t n_dirs = 1;

  static Grid line1d(double a, double b, std::size_t n,
                     NodePlacement placement = NodePlacement::endpoints_included);
  static Grid rect2d(std::size_t nx, std::size_t ny, NodePlacement placement,
                     double ax = 0.0, double bx = 1.0, double ay = 0.0,
                     double by = 1.0);
  static Grid angular_product(const Grid& spatial, std::size_t n_dirs);

  std::size_t size() const;
  double volume() const; // |Ω| (spatial volume; angular measure is normalized)

  // node coordinates; for angular_product these are the spatial coordinates
  // of index k, plus direction_of(k)
  double coord1d(std::size_t k) const;
  void coord2d(std::size_t k, double& x, double& y) const;
  std::size_t direction_of(std::size_t k) const;
  std::size_t spatial_size() const;

  bool same_as(const Grid& other) const;
  std::string describe() const;
};

/// Positive quadrature weights aligned with a grid's nodes.
struct Quadrature {
  std::vector<double> weights;
};

struct DiscreteField {
  Grid grid;
  std::vector<double> values;
};

/// Trapezoid weights for endpoint grids, uniform midpoint weights for
/// cell-centered grids (tensor products in 2-D); angular grids carry the
/// spatial weights scaled by 1/n_dirs. Weights always sum to the spatial
/// domain volume.
Quadrature make_quadrature(const Grid& grid);

/// Σ_k τ_k u_k v_k. Throws std::invalid_argument if grids differ.
double inner_product(const DiscreteField& u, const DiscreteField& v,
                     const Quadrature& q);

enum class Norm { l1, l2 };

/// l2: sqrt(<e,e>)/sqrt(<t,t>); l1: Στ|e| / Στ|t|, e = pred - truth.
/// Throws std::invalid_argument on grid mismatch or a zero-norm truth.
double relative_error(const DiscreteField& pred, const DiscreteField& truth,
                      const Quadrature& q, Norm norm);

/// Pointwise evaluation at the grid nodes (1-D or 2-D spatial grids).
/// Throws std::runtime_error naming the node if f returns a non-finite value.
DiscreteField sample_on_grid(const std::function<double(double)>& f,
                             const Grid& grid);
DiscreteField sample_on_grid(const std::function<double(double, double)>& f,
                             const Grid& grid);

const char* norm_name(Norm n);
Norm norm_from_name(const std::string& name);

} // namespace c2bnet::grids
