#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fraclab {

/// Thrown for violated preconditions on domains, operators and solver inputs.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point = std::array<double, 2>;
using Lattice = std::array<int, 2>;
using NodePredicate = std::function<bool(const Point&)>;

/// Uniform grid over a bounded domain D, optionally carrying the inner set D0.
///
/// In 1D the nodes are vertex-centred: an interval (a, b) with n nodes has
/// spacing h = (b - a) / (n + 1) and nodes a + k h, k = 1..n, so the
/// continuum domain is exactly (a, b).
///
/// In 2D the nodes are cell-centred: each node owns the square cell of side h
/// around it, and the continuum domain is the union of the cells of the kept
/// nodes (a staircase region). A rectangle therefore is represented exactly.
///
/// Nodes are stored in lexicographic order of their lattice coordinates
/// (x first, then y), which makes every construction deterministic.
class GridDomain {
 public:
  static GridDomain interval(double a, double b, int n);
  static GridDomain rectangle(double x0, double x1, double y0, double y1, int nx, int ny);

  /// 2D only: keep the nodes whose coordinates satisfy `keep`. The kept set
  /// must be nonempty and 4-connected.
  [[nodiscard]] GridDomain with_mask(const NodePredicate& keep) const;

  /// Marks the nodes selected by `inside` as the closure of D0. The selection
  /// must be nonempty, connected, a strict subset of the nodes, and every
  /// selected node must have all of its lattice neighbours inside D and
  /// outside the outermost node layer.
  [[nodiscard]] GridDomain with_inner_domain(const NodePredicate& inside) const;

  /// A fresh domain made of the nodes in `mask` (same lattice, same spacing,
  /// exterior = everything else). In 1D the selection must be contiguous.
  [[nodiscard]] GridDomain restricted_to(const std::vector<bool>& mask) const;

  /// The domain made of the D0 nodes; requires an inner domain.
  [[nodiscard]] GridDomain inner_domain() const;

  int dim() const { return dim_; }
  double spacing() const { return h_; }
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
  std::size_t size() const { return nodes_.size(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Lattice>& lattice() const { return lattice_; }
  const Point& node(std::size_t i) const { return nodes_[i]; }

  /// Index of the node at lattice coordinate `l`, if it belongs to the domain.
  std::optional<std::size_t> index_of(const Lattice& l) const;

  /// Coordinate of an arbitrary lattice site (inside or outside the domain).
  Point position(const Lattice& l) const;

  bool has_inner_domain() const { return !d0_mask_.empty(); }
  const std::vector<bool>& d0_mask() const { return d0_mask_; }
  std::size_t inner_count() const;

  /// Continuum membership test used for killing Monte Carlo paths.
  bool contains(const Point& p) const;

  /// Nodes with at least one lattice neighbour outside the domain.
  std::vector<bool> boundary_layer() const;

  /// 1D interval bounds (a, b).
  std::array<double, 2> bounds() const;

  /// Largest distance from a node to the exterior; r0 uses half of this.
  double inradius() const;

  /// Node closest to the centroid of the node set.
  std::size_t centroid_node() const;

  /// Lattice neighbours (two in 1D, four in 2D).
  std::vector<Lattice> neighbours(const Lattice& l) const;

 private:
  GridDomain() = default;
  void rebuild_index();

  int dim_ = 1;
  double h_ = 0.0;
  Point origin_{};  // position of lattice (0, 0)
  double shift_ = 0.0;  // 0 for vertex-centred, 0.5 for cell-centred
  Lattice extent_{};  // lattice sites 0..extent-1 along each axis (2D) or 0..n+1 (1D)
  std::vector<Point> nodes_;
  std::vector<Lattice> lattice_;
  std::vector<long> site_to_node_;  // -1 where no node
  std::vector<bool> d0_mask_;
};

/// Per-node obstacle; +infinity marks an unconstrained node.
struct ObstacleVector {
  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  std::vector<double> values;
  std::vector<bool> finite_mask;

  std::size_t size() const { return values.size(); }
  bool is_finite(std::size_t i) const { return finite_mask[i]; }

  /// Largest finite value; 0 when all nodes are unconstrained.
  double max_finite() const;
  double min_finite() const;

  /// Builds an obstacle from explicit values; finite entries must be > 0.
  static ObstacleVector from_values(std::vector<double> values);
  static ObstacleVector unbounded(std::size_t n);
};

/// The indicator obstacle: 1 on D \ closure(D0), +infinity on closure(D0).
ObstacleVector build_obstacle(const GridDomain& g);

/// Predicate helpers for configs and tests.
NodePredicate ball_predicate(const Point& centre, double radius, bool closed = true);
NodePredicate box_predicate(const Point& lo, const Point& hi, bool closed = true);

}  // namespace fraclab
