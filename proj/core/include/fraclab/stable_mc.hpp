#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "fraclab/domain.hpp"
#include "fraclab/obstacle.hpp"

namespace fraclab {

using Rng = std::mt19937_64;

/// Path-average estimate. `coarse_value` is the same set of paths monitored
/// every second step (time step 2 dt); the gap to `value` measures dt bias.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long n_paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double coarse_value = 0.0;
};

struct McSettings {
  double alpha = 1.0;
  double dt = 1e-3;
  long n_paths = 100000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  long max_steps = 100'000'000;  // per path, guards against runaway loops
};

/// Standard symmetric alpha-stable variable with E exp(i xi Z) = exp(-|xi|^alpha)
/// (Chambers-Mallows-Stuck); alpha = 2 gives Normal(0, 2).
double sample_symmetric_stable(double alpha, Rng& rng);

/// Positive (alpha/2)-stable variable with E exp(-s A) = exp(-s^(alpha/2)) (Kanter).
double sample_positive_stable(double rho, Rng& rng);

/// Increment of the isotropic alpha-stable process over time dt in `dim`
/// dimensions, scale dt^(1/alpha). Only the first `dim` entries are used.
Point sample_stable_step(double alpha, double dt, int dim, Rng& rng);

/// Generator for path `index` of a run with master seed `seed`.
Rng path_rng(std::uint64_t seed, std::uint64_t index);

struct KilledPath {
  Point start{};
  std::vector<double> times;
  std::vector<Point> positions;
  std::vector<bool> alive_mask;
  double exit_time = 0.0;  // +inf if still alive at t_max
};

/// Euler walk with stable steps, killed at the first step that lands outside D.
KilledPath simulate_killed(const GridDomain& g, const Point& x, double alpha, double dt, double t_max, Rng& rng);

/// Piecewise-linear (1D) or bilinear (2D) interpolation of a node vector, with
/// zero at exterior lattice sites.
double interpolate(const GridDomain& g, const Vector& values, const Point& p);

/// Value of the node owning the cell containing p, 0 outside D.
double cell_value(const GridDomain& g, const Vector& values, const Point& p);

/// E_x int_0^tau e^(-beta t) f(X_t) dt with left-endpoint sums.
McEstimate mc_resolvent(const GridDomain& g, const std::function<double(const Point&)>& f, const Point& x,
                        double beta, const McSettings& s);

/// e^(a t) E_x[exp(-int_0^t w(X_s) ds) u(X_t) 1_{t < tau}] with w = nu / cell_volume.
McEstimate mc_feynman_kac(const GridDomain& g, const SolutionBundle& b, const Point& x, double t,
                          const McSettings& s);

/// E_x[u(X_{t ^ tau}) + int_0^{t ^ tau} f(X_s) ds] for u = R f given on the nodes.
McEstimate mc_dynkin(const GridDomain& g, const Vector& u, const std::function<double(const Point&)>& f,
                     const Point& x, double t, const McSettings& s);

/// Sum by recursive halving; the result depends only on the input order.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace fraclab
