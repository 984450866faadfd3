#include "fraclab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace fraclab {

namespace {

bool connected(const GridDomain& g, const std::vector<bool>& selected) {
  std::size_t start = selected.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (selected[i]) {
      if (start == selected.size()) start = i;
      ++count;
    }
  }
  if (count == 0) return false;
  std::vector<bool> seen(selected.size(), false);
  std::deque<std::size_t> queue{start};
  seen[start] = true;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    ++reached;
    for (const auto& nb : g.neighbours(g.lattice()[i])) {
      if (auto j = g.index_of(nb); j && selected[*j] && !seen[*j]) {
        seen[*j] = true;
        queue.push_back(*j);
      }
    }
  }
  return reached == count;
}

}  // namespace

GridDomain GridDomain::interval(double a, double b, int n) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("interval bounds must be finite");
  if (!(a < b)) throw DomainError("interval requires a < b");
  if (n < 4) throw DomainError("interval requires at least 4 nodes");
  GridDomain g;
  g.dim_ = 1;
  g.h_ = (b - a) / (n + 1);
  g.origin_ = {a, 0.0};
  g.shift_ = 0.0;
  g.extent_ = {n + 2, 1};
  for (int k = 1; k <= n; ++k) {
    g.lattice_.push_back({k, 0});
    g.nodes_.push_back({a + k * g.h_, 0.0});
  }
  g.rebuild_index();
  return g;
}

GridDomain GridDomain::rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  for (double v : {x0, x1, y0, y1}) {
    if (!std::isfinite(v)) throw DomainError("rectangle bounds must be finite");
  }
  if (!(x0 < x1) || !(y0 < y1)) throw DomainError("rectangle requires x0 < x1 and y0 < y1");
  if (nx < 4 || ny < 4) throw DomainError("rectangle requires at least 4 cells per axis");
  const double hx = (x1 - x0) / nx;
  const double hy = (y1 - y0) / ny;
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy)) {
    throw DomainError("rectangle cells must be square (equal spacing on both axes)");
  }
  GridDomain g;
  g.dim_ = 2;
  g.h_ = hx;
  g.origin_ = {x0, y0};
  g.shift_ = 0.5;
  g.extent_ = {nx, ny};
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      g.lattice_.push_back({i, j});
      g.nodes_.push_back(g.position({i, j}));
    }
  }
  g.rebuild_index();
  return g;
}

void GridDomain::rebuild_index() {
  site_to_node_.assign(static_cast<std::size_t>(extent_[0]) * extent_[1], -1);
  for (std::size_t i = 0; i < lattice_.size(); ++i) {
    const auto& l = lattice_[i];
    site_to_node_[static_cast<std::size_t>(l[0]) * extent_[1] + l[1]] = static_cast<long>(i);
  }
}

Point GridDomain::position(const Lattice& l) const {
  if (dim_ == 1) return {origin_[0] + l[0] * h_, 0.0};
  return {origin_[0] + (l[0] + shift_) * h_, origin_[1] + (l[1] + shift_) * h_};
}

std::optional<std::size_t> GridDomain::index_of(const Lattice& l) const {
  if (l[0] < 0 || l[1] < 0 || l[0] >= extent_[0] || l[1] >= extent_[1]) return std::nullopt;
  const long idx = site_to_node_[static_cast<std::size_t>(l[0]) * extent_[1] + l[1]];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

std::vector<Lattice> GridDomain::neighbours(const Lattice& l) const {
  if (dim_ == 1) return {{l[0] - 1, 0}, {l[0] + 1, 0}};
  return {{l[0] - 1, l[1]}, {l[0] + 1, l[1]}, {l[0], l[1] - 1}, {l[0], l[1] + 1}};
}

GridDomain GridDomain::with_mask(const NodePredicate& keep) const {
  if (dim_ != 2) throw DomainError("node masks are only supported in 2D");
  std::vector<bool> mask(size());
  for (std::size_t i = 0; i < size(); ++i) mask[i] = keep(nodes_[i]);
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw DomainError("domain mask selects no nodes");
  }
  if (!connected(*this, mask)) throw DomainError("domain mask must be connected");
  return restricted_to(mask);
}

GridDomain GridDomain::with_inner_domain(const NodePredicate& inside) const {
  std::vector<bool> mask(size());
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    mask[i] = inside(nodes_[i]);
    count += mask[i] ? 1 : 0;
  }
  if (count == 0) throw DomainError("inner domain selects no nodes");
  if (count == size()) throw DomainError("inner domain must be a strict subset of D");
  const auto layer = boundary_layer();
  for (std::size_t i = 0; i < size(); ++i) {
    if (mask[i] && layer[i]) {
      throw DomainError("inner domain touches the outermost node layer of D");
    }
  }
  if (!connected(*this, mask)) throw DomainError("inner domain must be connected");
  GridDomain g = *this;
  g.d0_mask_ = std::move(mask);
  return g;
}

GridDomain GridDomain::restricted_to(const std::vector<bool>& mask) const {
  if (mask.size() != size()) throw DomainError("restriction mask has wrong length");
  GridDomain g;
  g.dim_ = dim_;
  g.h_ = h_;
  g.origin_ = origin_;
  g.shift_ = shift_;
  g.extent_ = extent_;
  for (std::size_t i = 0; i < size(); ++i) {
    if (mask[i]) {
      g.lattice_.push_back(lattice_[i]);
      g.nodes_.push_back(nodes_[i]);
    }
  }
  if (g.nodes_.empty()) throw DomainError("restriction selects no nodes");
  if (dim_ == 1) {
    const int first = g.lattice_.front()[0];
    const int last = g.lattice_.back()[0];
    if (last - first + 1 != static_cast<int>(g.nodes_.size())) {
      throw DomainError("1D restriction must select a contiguous run of nodes");
    }
  }
  g.rebuild_index();
  return g;
}

GridDomain GridDomain::inner_domain() const {
  if (!has_inner_domain()) throw DomainError("domain has no inner domain");
  return restricted_to(d0_mask_);
}

std::size_t GridDomain::inner_count() const {
  return static_cast<std::size_t>(std::count(d0_mask_.begin(), d0_mask_.end(), true));
}

std::array<double, 2> GridDomain::bounds() const {
  if (dim_ != 1) throw DomainError("bounds() is only defined in 1D");
  return {nodes_.front()[0] - h_, nodes_.back()[0] + h_};
}

bool GridDomain::contains(const Point& p) const {
  if (dim_ == 1) {
    const auto [a, b] = bounds();
    return p[0] > a && p[0] < b;
  }
  const double fx = (p[0] - origin_[0]) / h_;
  const double fy = (p[1] - origin_[1]) / h_;
  if (!(fx > 0.0) || !(fy > 0.0)) return false;
  const Lattice l{static_cast<int>(std::floor(fx)), static_cast<int>(std::floor(fy))};
  return index_of(l).has_value();
}

std::vector<bool> GridDomain::boundary_layer() const {
  std::vector<bool> layer(size(), false);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const auto& nb : neighbours(lattice_[i])) {
      if (!index_of(nb)) {
        layer[i] = true;
        break;
      }
    }
  }
  return layer;
}

double GridDomain::inradius() const {
  if (dim_ == 1) {
    const auto [a, b] = bounds();
    double best = 0.0;
    for (const auto& p : nodes_) best = std::max(best, std::min(p[0] - a, b - p[0]));
    return best;
  }
  // Distance from each node to the nearest cell that is not part of the domain.
  std::vector<Lattice> holes;
  for (int i = -1; i <= extent_[0]; ++i) {
    for (int j = -1; j <= extent_[1]; ++j) {
      if (!index_of({i, j})) holes.push_back({i, j});
    }
  }
  double best = 0.0;
  for (const auto& p : nodes_) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& s : holes) {
      const Point c = position(s);
      const double dx = std::max(0.0, std::abs(p[0] - c[0]) - 0.5 * h_);
      const double dy = std::max(0.0, std::abs(p[1] - c[1]) - 0.5 * h_);
      nearest = std::min(nearest, std::hypot(dx, dy));
    }
    best = std::max(best, nearest);
  }
  return best;
}

std::size_t GridDomain::centroid_node() const {
  Point c{0.0, 0.0};
  for (const auto& p : nodes_) {
    c[0] += p[0];
    c[1] += p[1];
  }
  c[0] /= static_cast<double>(size());
  c[1] /= static_cast<double>(size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < size(); ++i) {
    const double d = std::hypot(nodes_[i][0] - c[0], nodes_[i][1] - c[1]);
    if (d < best_d - 1e-14) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double ObstacleVector::max_finite() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (finite_mask[i]) m = std::max(m, values[i]);
  }
  return m;
}

double ObstacleVector::min_finite() const {
  double m = kUnbounded;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (finite_mask[i]) m = std::min(m, values[i]);
  }
  return m;
}

ObstacleVector ObstacleVector::from_values(std::vector<double> values) {
  ObstacleVector h;
  h.finite_mask.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) throw DomainError("obstacle values must not be NaN");
    if (values[i] == kUnbounded) {
      h.finite_mask[i] = false;
    } else {
      if (!(values[i] > 0.0)) throw DomainError("finite obstacle values must be strictly positive");
      h.finite_mask[i] = true;
    }
  }
  h.values = std::move(values);
  return h;
}

ObstacleVector ObstacleVector::unbounded(std::size_t n) {
  return from_values(std::vector<double>(n, kUnbounded));
}

ObstacleVector build_obstacle(const GridDomain& g) {
  if (!g.has_inner_domain()) throw DomainError("build_obstacle requires an inner domain");
  std::vector<double> values(g.size());
  const auto& d0 = g.d0_mask();
  for (std::size_t i = 0; i < g.size(); ++i) values[i] = d0[i] ? ObstacleVector::kUnbounded : 1.0;
  return ObstacleVector::from_values(std::move(values));
}

NodePredicate ball_predicate(const Point& centre, double radius, bool closed) {
  return [centre, radius, closed](const Point& p) {
    const double d = std::hypot(p[0] - centre[0], p[1] - centre[1]);
    // Grid coordinates are sums of multiples of h; absorb rounding at the rim.
    const double slack = 1e-12 * std::max(1.0, radius);
    return closed ? d <= radius + slack : d < radius - slack;
  };
}

NodePredicate box_predicate(const Point& lo, const Point& hi, bool closed) {
  return [lo, hi, closed](const Point& p) {
    const double s = 1e-12;
    if (closed) {
      return p[0] >= lo[0] - s && p[0] <= hi[0] + s && p[1] >= lo[1] - s && p[1] <= hi[1] + s;
    }
    return p[0] > lo[0] + s && p[0] < hi[0] - s && p[1] > lo[1] + s && p[1] < hi[1] - s;
  };
}

}  // namespace fraclab
