#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/domain.hpp"
#include "fraclab/fracop.hpp"
#include "fraclab/report.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

enum class SolveStatus { converged, diverged_no_supersolution, trivial_zero, max_iter };

std::string to_string(SolveStatus s);

/// Projected SOR settings for the coercive LCP.
struct LcpOptions {
  double omega = 1.5;
  double tol = 1e-12;  // on the largest nodewise update, relative to max(1, |v|_inf)
  long max_sweeps = 2'000'000;
};

/// Solution of L v + nu/vol = f, v <= h, nu >= 0, nu (h - v) = 0.
struct LcpResult {
  Vector v;
  Vector nu_mass;
  long sweeps = 0;
  double residual = 0.0;  // natural residual |v - min(h, v + (f - L v)/diag)|_inf
};

/// Projected Gauss-Seidel over the nodes in index order. Nodes with an
/// unbounded obstacle are unconstrained. Throws ConvergenceError when
/// max_sweeps is exhausted.
LcpResult solve_coercive_obstacle(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h,
                                  const LcpOptions& opts = {}, const Vector* warm_start = nullptr);

/// Natural residual of the LCP at v.
double lcp_residual(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h, const Vector& v);

/// Penalised problem L v + p (v - h)^+ = f, solved by iterating on the active
/// set {v > h}: each step is the linear solve (L + p 1_A) v = f + p 1_A h.
/// Factorisations are cached per active set, so repeated solves with a stable
/// contact set cost one triangular solve each.
class PenaltySolver {
 public:
  PenaltySolver(const DiscreteOperator& L, const ObstacleVector& h, double penalty);

  /// nu_mass is p (v - h)^+ * vol.
  LcpResult solve(const Vector& f, const Vector* warm_start = nullptr);

  double penalty() const { return penalty_; }
  long factorizations() const { return factorizations_; }

 private:
  const DiscreteOperator& L_;
  const ObstacleVector& h_;
  double penalty_;
  std::vector<bool> cached_set_;
  std::optional<OperatorFactorization> cached_;
  long factorizations_ = 0;
};

enum class InnerSolver { psor, penalty };

struct SolveOptions {
  LcpOptions inner;
  InnerSolver inner_solver = InnerSolver::psor;
  double penalty = 1e6;
  double outer_tol = 1e-9;   // on the estimated distance to the fixed point, relative to max(1, |u|_inf)
  double zero_tol = 1e-8;    // |u|_inf below this is collapse to zero
  std::optional<double> blowup_cap;  // default 1e6 * max finite obstacle
  long max_outer = 200000;
  double contact_tol = 1e-8;
  double verify_tol = 1e-8;
  bool verify = true;
};

/// Outcome of the monotone iteration u_n = S(a u_{n-1}).
struct SolutionBundle {
  Vector u;
  Vector nu_mass;
  double a = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  long outer_iters = 0;
  long inner_iters_total = 0;
  double comp_residual = 0.0;  // max nu_i (h_i - u_i) over finite nodes
  double pde_residual = 0.0;   // |u - L^-1 (a u - nu/vol)|_inf
  double monotone_violation = 0.0;     // max over iterations of (u_{n-1} - u_n)^+
  double nu_monotone_violation = 0.0;  // same for nu
  std::vector<Report> reports;         // verifiers run on convergence
};

SolutionBundle monotone_solve(const DiscreteOperator& L, double a, const ObstacleVector& h, const Vector& u0,
                              const SolveOptions& opts = {});

/// c phi with c = 1/2 min over finite nodes of h_i / phi_i. Requires a > lambda_1.
Vector initial_subsolution(const SpectralPair& sp, const ObstacleVector& h, double a);

/// The same scaling without the subsolution requirement on a.
Vector scaled_ground_state(const SpectralPair& sp, const ObstacleVector& h);

/// Fills comp_residual and pde_residual from (u, nu_mass, a).
void compute_residuals(const DiscreteOperator& L, const ObstacleVector& h, SolutionBundle& b);

Report verify_integral_solution(const DiscreteOperator& L, const SolutionBundle& b, const ObstacleVector& h,
                                double tol = 1e-8);

/// Probes must satisfy eta <= h for the inequality; the equality form is
/// evaluated for every probe. Throws DomainError on a probe above h.
Report verify_weak_solution(const DiscreteOperator& L, const SolutionBundle& b, const ObstacleVector& h,
                            const std::vector<Vector>& probes, double tol = 1e-8);

/// Random probes below h, drawn from a seeded generator.
std::vector<Vector> random_probes(const SolutionBundle& b, const ObstacleVector& h, int count, std::uint64_t seed);

/// nu = u nu, and supp nu inside the contact set, off D0 and off the outermost layer.
Report verify_reaction_identity(const GridDomain& g, const SolutionBundle& b, double tol = 1e-8,
                                double contact_tol = 1e-8);

/// c* = max u / (|u|_L1 phi), and |nu|_TV <= a |u|_L1.
Report verify_bounds(const GridDomain& g, const SolutionBundle& b, const SpectralPair& sp);

/// Pointwise minimum of two supersolutions is a supersolution. Each input must
/// satisfy L u - a u + nu/vol >= -tol and nu (h - u) <= tol, else DomainError.
Report verify_min_supersolution(const DiscreteOperator& L, const ObstacleVector& h, const SolutionBundle& b1,
                                const SolutionBundle& b2, double tol = 1e-8);

/// lambda_1(L + diag(nu/vol)) = a and the ground state is aligned with u.
Report verify_eigen_identity(const DiscreteOperator& L, const SolutionBundle& b, double tol = 1e-6,
                             double align_tol = 1e-8);

/// Runs all verifiers that need nothing beyond the bundle and operator.
std::vector<Report> verify_all(const DiscreteOperator& L, const ObstacleVector& h, const SolutionBundle& b,
                               const SpectralPair& sp, const SolveOptions& opts = {});

struct SweepPoint {
  double a = 0.0;
  std::vector<SolutionBundle> runs;  // one per start
  double max_u_diff = 0.0;           // max pairwise |u - u'|_inf / |u|_inf
  double max_nu_tv_diff = 0.0;       // max pairwise sum |nu - nu'|
  double fixed_point_defect = 0.0;   // |r - a L^-1 r|_inf / |r|_inf for the worst pair, 0 if r = 0
  double spectral_gap = 0.0;         // |a / lambda_1 - 1|, so r = a L^-1 r forces r = 0
  bool all_converged = false;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  double max_u_diff = 0.0;
  double max_nu_tv_diff = 0.0;
  double comparison_violation = 0.0;  // max (u(a) - u(a'))^+ and (nu(a) - nu(a'))^+ for a < a'
  bool all_converged = false;
};

/// For each a in the window, solves from `starts` initialisations and compares.
/// Runs in parallel over a-values on up to `jobs` threads.
SweepReport uniqueness_sweep(const DiscreteOperator& L, const SpectralPair& sp_d, const SpectralPair& sp_d0,
                             const ObstacleVector& h, const std::vector<double>& a_grid, int starts,
                             std::uint64_t seed, const SolveOptions& opts = {}, unsigned jobs = 1);

}  // namespace fraclab
