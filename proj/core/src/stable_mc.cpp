#include "fraclab/stable_mc.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <limits>

#include "fraclab/parallel.hpp"

namespace fraclab {

using boost::math::constants::pi;

namespace {

double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  while (v == 0.0) v = u(rng);
  return v;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("stable index alpha must lie in (0, 2]");
}

struct PathValue {
  double fine = 0.0;
  double coarse = 0.0;
};

McEstimate summarise(const std::vector<PathValue>& values, const McSettings& s) {
  const std::size_t n = values.size();
  std::vector<double> fine(n);
  std::vector<double> coarse(n);
  for (std::size_t i = 0; i < n; ++i) {
    fine[i] = values[i].fine;
    coarse[i] = values[i].coarse;
  }
  McEstimate e;
  e.n_paths = static_cast<long>(n);
  e.dt = s.dt;
  e.seed = s.seed;
  e.value = pairwise_sum(fine.data(), n) / static_cast<double>(n);
  e.coarse_value = pairwise_sum(coarse.data(), n) / static_cast<double>(n);
  for (auto& v : fine) v = (v - e.value) * (v - e.value);
  const double var = n > 1 ? pairwise_sum(fine.data(), n) / static_cast<double>(n - 1) : 0.0;
  e.std_error = std::sqrt(var / static_cast<double>(n));
  return e;
}

template <typename PathFn>
McEstimate run_paths(const McSettings& s, PathFn&& path) {
  check_alpha(s.alpha);
  if (!(s.dt > 0.0)) throw DomainError("time step must be positive");
  if (s.n_paths < 1) throw DomainError("need at least one path");
  std::vector<PathValue> values(static_cast<std::size_t>(s.n_paths));
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (values.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, s.jobs, [&](std::size_t c) {
    const std::size_t end = std::min(values.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      Rng rng = path_rng(s.seed, i);
      values[i] = path(rng);
    }
  });
  return summarise(values, s);
}

void require_inside(const GridDomain& g, const Point& x) {
  if (!g.contains(x)) throw DomainError("starting point lies outside the domain");
}

Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }

}  // namespace

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double sample_symmetric_stable(double alpha, Rng& rng) {
  check_alpha(alpha);
  if (alpha == 2.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return std::sqrt(2.0) * normal(rng);
  }
  const double v = pi<double>() * (open_uniform(rng) - 0.5);
  if (alpha == 1.0) return std::tan(v);
  const double w = -std::log(open_uniform(rng));
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double rho, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("positive stable index must lie in (0, 1)");
  const double u = pi<double>() * open_uniform(rng);
  const double e = -std::log(open_uniform(rng));
  return std::sin(rho * u) / std::pow(std::sin(u), 1.0 / rho) *
         std::pow(std::sin((1.0 - rho) * u) / e, (1.0 - rho) / rho);
}

Point sample_stable_step(double alpha, double dt, int dim, Rng& rng) {
  check_alpha(alpha);
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const double scale = std::pow(dt, 1.0 / alpha);
  if (dim == 1) return {scale * sample_symmetric_stable(alpha, rng), 0.0};
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gx = normal(rng);
  const double gy = normal(rng);
  // Gaussian subordinated by a positive alpha/2-stable time: isotropic in 2D.
  const double mix = alpha == 2.0 ? 1.0 : sample_positive_stable(alpha / 2.0, rng);
  const double r = scale * std::sqrt(2.0 * mix);
  return {r * gx, r * gy};
}

Rng path_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

KilledPath simulate_killed(const GridDomain& g, const Point& x, double alpha, double dt, double t_max, Rng& rng) {
  require_inside(g, x);
  KilledPath path;
  path.start = x;
  path.times.push_back(0.0);
  path.positions.push_back(x);
  path.alive_mask.push_back(true);
  path.exit_time = std::numeric_limits<double>::infinity();
  Point pos = x;
  for (long k = 1; k * dt <= t_max + 1e-12 * dt; ++k) {
    pos = add(pos, sample_stable_step(alpha, dt, g.dim(), rng));
    const bool alive = g.contains(pos);
    path.times.push_back(k * dt);
    path.positions.push_back(pos);
    path.alive_mask.push_back(alive);
    if (!alive) {
      path.exit_time = k * dt;
      break;
    }
  }
  return path;
}

double interpolate(const GridDomain& g, const Vector& values, const Point& p) {
  if (static_cast<std::size_t>(values.size()) != g.size()) throw DomainError("field has wrong length");
  const Point o = g.position({0, 0});
  const double h = g.spacing();
  auto at = [&](int i, int j) {
    const auto idx = g.index_of({i, j});
    return idx ? values[static_cast<Eigen::Index>(*idx)] : 0.0;
  };
  const double sx = (p[0] - o[0]) / h;
  const int i = static_cast<int>(std::floor(sx));
  const double fx = sx - i;
  if (g.dim() == 1) return (1.0 - fx) * at(i, 0) + fx * at(i + 1, 0);
  const double sy = (p[1] - o[1]) / h;
  const int j = static_cast<int>(std::floor(sy));
  const double fy = sy - j;
  return (1.0 - fx) * (1.0 - fy) * at(i, j) + fx * (1.0 - fy) * at(i + 1, j) + (1.0 - fx) * fy * at(i, j + 1) +
         fx * fy * at(i + 1, j + 1);
}

double cell_value(const GridDomain& g, const Vector& values, const Point& p) {
  if (static_cast<std::size_t>(values.size()) != g.size()) throw DomainError("field has wrong length");
  const Point o = g.position({0, 0});
  const double h = g.spacing();
  const int i = static_cast<int>(std::lround((p[0] - o[0]) / h));
  const int j = g.dim() == 1 ? 0 : static_cast<int>(std::lround((p[1] - o[1]) / h));
  const auto idx = g.index_of({i, j});
  return idx ? values[static_cast<Eigen::Index>(*idx)] : 0.0;
}

McEstimate mc_resolvent(const GridDomain& g, const std::function<double(const Point&)>& f, const Point& x,
                        double beta, const McSettings& s) {
  require_inside(g, x);
  if (!(beta >= 0.0)) throw DomainError("discount beta must be nonnegative");
  return run_paths(s, [&](Rng& rng) {
    PathValue v;
    Point pos = x;
    bool fine_alive = true;
    bool coarse_alive = true;
    for (long k = 0; fine_alive || coarse_alive; ++k) {
      if (k > s.max_steps) throw ConvergenceError("path exceeded max_steps without leaving the domain");
      const double disc = std::exp(-beta * k * s.dt) * f(pos);
      if (fine_alive) v.fine += disc * s.dt;
      if (coarse_alive && k % 2 == 0) v.coarse += disc * 2.0 * s.dt;
      pos = add(pos, sample_stable_step(s.alpha, s.dt, g.dim(), rng));
      if (!g.contains(pos)) {
        fine_alive = false;
        if ((k + 1) % 2 == 0) coarse_alive = false;
      }
    }
    return v;
  });
}

McEstimate mc_feynman_kac(const GridDomain& g, const SolutionBundle& b, const Point& x, double t,
                          const McSettings& s) {
  require_inside(g, x);
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  const Vector w = b.nu_mass / g.cell_volume();
  const long steps = std::lround(t / s.dt);
  const double growth = std::exp(b.a * t);
  return run_paths(s, [&](Rng& rng) {
    PathValue v;
    Point pos = x;
    bool fine_alive = true;
    bool coarse_alive = true;
    double fine_a = 0.0;
    double coarse_a = 0.0;
    for (long k = 0; k < steps && (fine_alive || coarse_alive); ++k) {
      const double wk = cell_value(g, w, pos);
      if (fine_alive) fine_a += wk * s.dt;
      if (coarse_alive && k % 2 == 0) coarse_a += wk * 2.0 * s.dt;
      pos = add(pos, sample_stable_step(s.alpha, s.dt, g.dim(), rng));
      if (!g.contains(pos)) {
        fine_alive = false;
        if ((k + 1) % 2 == 0) coarse_alive = false;
      }
    }
    const double end = (fine_alive || coarse_alive) ? interpolate(g, b.u, pos) : 0.0;
    v.fine = fine_alive ? growth * std::exp(-fine_a) * end : 0.0;
    v.coarse = coarse_alive ? growth * std::exp(-coarse_a) * end : 0.0;
    if (steps % 2 != 0) v.coarse = v.fine;
    return v;
  });
}

McEstimate mc_dynkin(const GridDomain& g, const Vector& u, const std::function<double(const Point&)>& f,
                     const Point& x, double t, const McSettings& s) {
  require_inside(g, x);
  if (!(t >= 0.0)) throw DomainError("time must be nonnegative");
  const long steps = std::lround(t / s.dt);
  return run_paths(s, [&](Rng& rng) {
    PathValue v;
    Point pos = x;
    bool fine_alive = true;
    bool coarse_alive = true;
    for (long k = 0; k < steps && (fine_alive || coarse_alive); ++k) {
      const double fk = f(pos);
      if (fine_alive) v.fine += fk * s.dt;
      if (coarse_alive && k % 2 == 0) v.coarse += fk * 2.0 * s.dt;
      pos = add(pos, sample_stable_step(s.alpha, s.dt, g.dim(), rng));
      if (!g.contains(pos)) {
        fine_alive = false;
        if ((k + 1) % 2 == 0) coarse_alive = false;
      }
    }
    const double end = (fine_alive || coarse_alive) ? interpolate(g, u, pos) : 0.0;
    if (fine_alive) v.fine += end;
    if (coarse_alive) v.coarse += end;
    if (steps % 2 != 0) v.coarse = v.fine;
    return v;
  });
}

}  // namespace fraclab
