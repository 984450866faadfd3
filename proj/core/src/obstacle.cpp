#include "fraclab/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fraclab/parallel.hpp"

namespace fraclab {

namespace {

void check_sizes(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h) {
  if (static_cast<std::size_t>(f.size()) != L.size() || h.size() != L.size()) {
    throw DomainError("operator, right-hand side and obstacle sizes differ");
  }
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// nu_i = (f - L v)_i^+ * vol on nodes where v touches a finite obstacle.
Vector reaction_masses(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h, const Vector& v) {
  const Vector r = f - L.apply(v);
  const double vol = L.grid().cell_volume();
  Vector nu = Vector::Zero(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (h.is_finite(k) && v[i] >= h.values[k]) nu[i] = std::max(0.0, r[i]) * vol;
  }
  return nu;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::diverged_no_supersolution:
      return "diverged_no_supersolution";
    case SolveStatus::trivial_zero:
      return "trivial_zero";
    case SolveStatus::max_iter:
      return "max_iter";
  }
  return "unknown";
}

LcpResult solve_coercive_obstacle(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h,
                                  const LcpOptions& opts, const Vector* warm_start) {
  check_sizes(L, f, h);
  if (!(opts.omega > 0.0 && opts.omega < 2.0)) throw DomainError("relaxation parameter must lie in (0, 2)");
  const auto n = static_cast<Eigen::Index>(L.size());
  LcpResult res;
  if (warm_start) {
    if (warm_start->size() != n) throw DomainError("warm start has wrong length");
    res.v = *warm_start;
  } else {
    res.v = Vector::Zero(n);
  }
  Vector& v = res.v;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (h.is_finite(k)) v[i] = std::min(v[i], h.values[k]);
  }

  const double w = opts.omega;
  const Vector& diag = L.diagonal();
  for (long sweep = 1;; ++sweep) {
    double delta = 0.0;
    double scale = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double gs = (f[i] - L.offdiag_dot(k, v)) / diag[i];
      double next = (1.0 - w) * v[i] + w * gs;
      if (h.is_finite(k)) next = std::min(next, h.values[k]);
      delta = std::max(delta, std::abs(next - v[i]));
      v[i] = next;
      scale = std::max(scale, std::abs(next));
    }
    res.sweeps = sweep;
    if (delta <= opts.tol * scale) break;
    if (sweep >= opts.max_sweeps) {
      throw ConvergenceError("projected SOR did not converge in " + std::to_string(opts.max_sweeps) + " sweeps");
    }
  }
  res.nu_mass = reaction_masses(L, f, h, v);
  res.residual = lcp_residual(L, f, h, v);
  return res;
}

double lcp_residual(const DiscreteOperator& L, const Vector& f, const ObstacleVector& h, const Vector& v) {
  check_sizes(L, f, h);
  const Vector r = f - L.apply(v);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    double target = v[i] + r[i] / L.diagonal(k);
    if (h.is_finite(k)) target = std::min(target, h.values[k]);
    worst = std::max(worst, std::abs(v[i] - target));
  }
  return worst;
}

PenaltySolver::PenaltySolver(const DiscreteOperator& L, const ObstacleVector& h, double penalty)
    : L_(L), h_(h), penalty_(penalty) {
  if (h.size() != L.size()) throw DomainError("obstacle size does not match operator");
  if (!(penalty > 0.0) || !std::isfinite(penalty)) throw DomainError("penalty must be positive and finite");
}

LcpResult PenaltySolver::solve(const Vector& f, const Vector* warm_start) {
  check_sizes(L_, f, h_);
  const auto n = static_cast<Eigen::Index>(L_.size());
  std::vector<bool> active(L_.size(), false);
  if (warm_start) {
    if (warm_start->size() != n) throw DomainError("warm start has wrong length");
    for (std::size_t k = 0; k < L_.size(); ++k) active[k] = h_.is_finite(k) && (*warm_start)[static_cast<Eigen::Index>(k)] > h_.values[k];
  } else if (cached_) {
    active = cached_set_;
  }

  LcpResult res;
  constexpr int kMaxSteps = 500;
  for (int step = 1;; ++step) {
    if (!cached_ || active != cached_set_) {
      Vector shift = Vector::Zero(n);
      for (std::size_t k = 0; k < L_.size(); ++k) {
        if (active[k]) shift[static_cast<Eigen::Index>(k)] = penalty_;
      }
      cached_.emplace(L_, shift);
      cached_set_ = active;
      ++factorizations_;
    }
    Vector rhs = f;
    for (std::size_t k = 0; k < L_.size(); ++k) {
      if (active[k]) rhs[static_cast<Eigen::Index>(k)] += penalty_ * h_.values[k];
    }
    res.v = cached_->solve(rhs);
    res.sweeps = step;
    std::vector<bool> next(L_.size(), false);
    for (std::size_t k = 0; k < L_.size(); ++k) next[k] = h_.is_finite(k) && res.v[static_cast<Eigen::Index>(k)] > h_.values[k];
    if (next == active) break;
    if (step >= kMaxSteps) throw ConvergenceError("penalty active-set iteration did not settle");
    active = std::move(next);
  }

  const double vol = L_.grid().cell_volume();
  res.nu_mass = Vector::Zero(n);
  for (std::size_t k = 0; k < L_.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (h_.is_finite(k)) res.nu_mass[i] = penalty_ * std::max(0.0, res.v[i] - h_.values[k]) * vol;
  }
  res.residual = (L_.apply(res.v) + res.nu_mass / vol - f).cwiseAbs().maxCoeff();
  return res;
}

Vector scaled_ground_state(const SpectralPair& sp, const ObstacleVector& h) {
  if (static_cast<std::size_t>(sp.phi.size()) != h.size()) throw DomainError("eigenvector and obstacle sizes differ");
  double c = ObstacleVector::kUnbounded;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h.is_finite(k)) c = std::min(c, h.values[k] / sp.phi[static_cast<Eigen::Index>(k)]);
  }
  // Without any finite obstacle the scale is free; normalise the peak to 1/2.
  if (c == ObstacleVector::kUnbounded) c = 1.0 / sp.phi.maxCoeff();
  return 0.5 * c * sp.phi;
}

Vector initial_subsolution(const SpectralPair& sp, const ObstacleVector& h, double a) {
  if (!(a > sp.lambda)) {
    throw DomainError("initial_subsolution requires a > lambda_1 (got a = " + std::to_string(a) +
                      ", lambda_1 = " + std::to_string(sp.lambda) + ")");
  }
  return scaled_ground_state(sp, h);
}

void compute_residuals(const DiscreteOperator& L, const ObstacleVector& h, SolutionBundle& b) {
  const double vol = L.grid().cell_volume();
  b.comp_residual = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (h.is_finite(k)) {
      b.comp_residual = std::max(b.comp_residual, b.nu_mass[i] * (h.values[k] - b.u[i]));
    } else {
      b.comp_residual = std::max(b.comp_residual, std::abs(b.nu_mass[i]));
    }
  }
  const Vector lu = L.apply(b.u);
  const double scale = std::max(inf_norm(lu) + std::abs(b.a) * inf_norm(b.u), 1e-300);
  b.pde_residual = inf_norm(lu - b.a * b.u + b.nu_mass / vol) / scale;
}

SolutionBundle monotone_solve(const DiscreteOperator& L, double a, const ObstacleVector& h, const Vector& u0,
                              const SolveOptions& opts) {
  check_sizes(L, u0, h);
  if ((u0.array() < 0.0).any()) throw DomainError("monotone_solve requires a nonnegative start");
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("parameter a must be positive and finite");
  const double cap = opts.blowup_cap.value_or(1e6 * std::max(h.max_finite(), 1.0));

  SolutionBundle b;
  b.a = a;
  std::optional<PenaltySolver> penalty;
  if (opts.inner_solver == InnerSolver::penalty) penalty.emplace(L, h, opts.penalty);

  Vector u = u0;
  Vector nu_prev = Vector::Zero(u.size());
  double diff_prev = 0.0;
  double ratio_prev = 1.0;
  for (long it = 1;; ++it) {
    const Vector f = a * u;
    LcpResult step = penalty ? penalty->solve(f, &u) : solve_coercive_obstacle(L, f, h, opts.inner, &u);
    b.inner_iters_total += step.sweeps;
    b.outer_iters = it;

    const double diff = inf_norm(step.v - u);
    b.monotone_violation = std::max(b.monotone_violation, (u - step.v).maxCoeff());
    if (it > 1) b.nu_monotone_violation = std::max(b.nu_monotone_violation, (nu_prev - step.nu_mass).maxCoeff());
    u = std::move(step.v);
    nu_prev = std::move(step.nu_mass);
    const double norm = inf_norm(u);

    if (!(norm <= cap)) {
      b.status = SolveStatus::diverged_no_supersolution;
      break;
    }
    if (norm < opts.zero_tol) {
      b.status = SolveStatus::trivial_zero;
      break;
    }
    // Geometric tail estimate from the observed contraction; inexact inner
    // solves put a floor under diff, which also counts as converged.
    const double scale = std::max(1.0, norm);
    const double ratio = diff_prev > 0.0 ? diff / diff_prev : 1.0;
    const double rho = std::max(ratio, ratio_prev);
    const bool tail_small = it > 2 && rho < 1.0 && diff * rho / (1.0 - rho) <= opts.outer_tol * scale;
    const bool at_floor = diff <= 10.0 * opts.inner.tol * scale;
    if (diff == 0.0 || tail_small || at_floor) {
      b.status = SolveStatus::converged;
      break;
    }
    if (it >= opts.max_outer) {
      b.status = SolveStatus::max_iter;
      break;
    }
    ratio_prev = ratio;
    diff_prev = diff;
  }

  b.u = std::move(u);
  if (penalty) {
    b.nu_mass = std::move(nu_prev);
  } else {
    b.nu_mass = reaction_masses(L, a * b.u, h, b.u);
  }
  compute_residuals(L, h, b);
  if (opts.verify && b.status == SolveStatus::converged) {
    b.reports.push_back(verify_integral_solution(L, b, h, opts.verify_tol));
    b.reports.push_back(verify_reaction_identity(L.grid(), b, opts.verify_tol, opts.contact_tol));
  }
  return b;
}

Report verify_integral_solution(const DiscreteOperator& L, const SolutionBundle& b, const ObstacleVector& h,
                                double tol) {
  Report r{"integral_solution", {}};
  const double vol = L.grid().cell_volume();
  double above = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h.is_finite(k)) above = std::max(above, b.u[static_cast<Eigen::Index>(k)] - h.values[k]);
  }
  r.above("min_u", b.u.minCoeff(), 0.0);
  r.at_most("max_u_minus_h", above, tol);

  const OperatorFactorization factor(L);
  const Vector rep = factor.solve(b.a * b.u - b.nu_mass / vol);
  r.at_most("green_representation", inf_norm(b.u - rep) / std::max(1.0, inf_norm(b.u)), tol);

  double comp = 0.0;
  double off_obstacle = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (h.is_finite(k)) {
      comp = std::max(comp, b.nu_mass[i] * (h.values[k] - b.u[i]));
    } else {
      off_obstacle = std::max(off_obstacle, std::abs(b.nu_mass[i]));
    }
  }
  r.at_least("min_nu", b.nu_mass.size() ? b.nu_mass.minCoeff() : 0.0, 0.0);
  r.at_most("complementarity", comp, tol);
  r.at_most("nu_on_unbounded_nodes", off_obstacle, 0.0);
  return r;
}

Report verify_weak_solution(const DiscreteOperator& L, const SolutionBundle& b, const ObstacleVector& h,
                            const std::vector<Vector>& probes, double tol) {
  Report r{"weak_solution", {}};
  const double vol = L.grid().cell_volume();
  const Vector lu = L.apply(b.u);
  double worst_ineq = 0.0;
  double worst_eq = 0.0;
  for (const auto& eta : probes) {
    if (eta.size() != b.u.size()) throw DomainError("probe has wrong length");
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (h.is_finite(k) && eta[static_cast<Eigen::Index>(k)] > h.values[k]) {
        throw DomainError("probe exceeds the obstacle at node " + std::to_string(k));
      }
    }
    const Vector d = eta - b.u;
    const double lhs = lu.dot(d) * vol;
    const double rhs = b.a * b.u.dot(d) * vol;
    const double s = std::max(1.0, std::abs(lhs) + std::abs(rhs));
    worst_ineq = std::max(worst_ineq, (rhs - lhs) / s);

    const double e_lhs = lu.dot(eta) * vol;
    const double e_rhs = b.a * b.u.dot(eta) * vol - eta.dot(b.nu_mass);
    worst_eq = std::max(worst_eq, std::abs(e_lhs - e_rhs) / std::max(1.0, std::abs(e_lhs) + std::abs(e_rhs)));
  }
  r.at_most("variational_inequality_deficit", worst_ineq, tol);
  r.at_most("reaction_identity_residual", worst_eq, tol);
  return r;
}

std::vector<Vector> random_probes(const SolutionBundle& b, const ObstacleVector& h, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> probes;
  const double top = std::max(1.0, inf_norm(b.u));
  for (int p = 0; p < count; ++p) {
    Vector eta(b.u.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const double cap = h.is_finite(k) ? h.values[k] : 2.0 * top;
      eta[i] = cap * unit(rng);
    }
    probes.push_back(std::move(eta));
  }
  return probes;
}

Report verify_reaction_identity(const GridDomain& g, const SolutionBundle& b, double tol, double contact_tol) {
  Report r{"reaction_identity", {}};
  const double total = b.nu_mass.cwiseAbs().sum();
  double defect = 0.0;
  double off_contact = 0.0;
  double in_d0 = 0.0;
  double on_layer = 0.0;
  const auto layer = g.boundary_layer();
  const auto& d0 = g.d0_mask();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    const double nu = b.nu_mass[i];
    defect = std::max(defect, std::abs(nu * (b.u[i] - 1.0)));
    if (nu > 0.0) {
      if (!(std::abs(b.u[i] - 1.0) < contact_tol)) off_contact += nu;
      if (!d0.empty() && d0[k]) in_d0 += nu;
      if (layer[k]) on_layer += nu;
    }
  }
  r.at_most("max_nu_times_u_minus_1", defect, tol * std::max(total, 1e-300));
  r.at_most("nu_mass_off_contact_set", off_contact, 0.0);
  r.at_most("nu_mass_in_d0", in_d0, 0.0);
  r.at_most("nu_mass_on_outer_layer", on_layer, 0.0);
  return r;
}

Report verify_bounds(const GridDomain& g, const SolutionBundle& b, const SpectralPair& sp) {
  Report r{"bounds", {}};
  const double vol = g.cell_volume();
  const double l1 = b.u.cwiseAbs().sum() * vol;
  const double cstar = (b.u.array() / sp.phi.array()).maxCoeff() / l1;
  r.below("ground_state_constant", cstar, ObstacleVector::kUnbounded);
  const double tv = b.nu_mass.cwiseAbs().sum();
  r.below("total_variation_minus_a_l1", tv - b.a * l1, 0.0);
  return r;
}

Report verify_min_supersolution(const DiscreteOperator& L, const ObstacleVector& h, const SolutionBundle& b1,
                                const SolutionBundle& b2, double tol) {
  if (b1.a != b2.a) throw DomainError("supersolutions must share the parameter a");
  const double vol = L.grid().cell_volume();
  const double a = b1.a;
  auto defect = [&](const Vector& u, const Vector& nu) { return Vector(L.apply(u) - a * u + nu / vol); };
  auto comp = [&](const Vector& u, const Vector& nu) {
    double c = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      c = std::max(c, h.is_finite(k) ? nu[i] * (h.values[k] - u[i]) : std::abs(nu[i]));
    }
    return c;
  };
  for (const auto* b : {&b1, &b2}) {
    const double scale = std::max(1.0, inf_norm(L.apply(b->u)));
    if (defect(b->u, b->nu_mass).minCoeff() < -tol * scale || comp(b->u, b->nu_mass) > tol) {
      throw DomainError("verify_min_supersolution: input is not a supersolution");
    }
  }
  Vector w(b1.u.size());
  Vector nu(b1.u.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (b1.u[i] > b2.u[i]) {
      w[i] = b2.u[i];
      nu[i] = b2.nu_mass[i];
    } else {
      w[i] = b1.u[i];
      nu[i] = b1.nu_mass[i];
    }
  }
  Report r{"min_supersolution", {}};
  const double scale = std::max(1.0, inf_norm(L.apply(w)));
  r.at_least("min_remainder", defect(w, nu).minCoeff() / scale, -tol);
  r.at_most("complementarity", comp(w, nu), tol);
  return r;
}

Report verify_eigen_identity(const DiscreteOperator& L, const SolutionBundle& b, double tol, double align_tol) {
  Report r{"eigen_identity", {}};
  const Vector w = b.nu_mass.cwiseMax(0.0) / L.grid().cell_volume();
  const SpectralPair sp = principal_eigenpair_perturbed(L, w);
  r.at_most("relative_eigenvalue_gap", std::abs(sp.lambda - b.a) / b.a, tol);
  r.above("alignment", alignment(sp.phi, b.u), 1.0 - align_tol);
  return r;
}

std::vector<Report> verify_all(const DiscreteOperator& L, const ObstacleVector& h, const SolutionBundle& b,
                               const SpectralPair& sp, const SolveOptions& opts) {
  std::vector<Report> out;
  out.push_back(verify_integral_solution(L, b, h, opts.verify_tol));
  out.push_back(verify_weak_solution(L, b, h, random_probes(b, h, 8, 12345), opts.verify_tol));
  out.push_back(verify_reaction_identity(L.grid(), b, opts.verify_tol, opts.contact_tol));
  out.push_back(verify_bounds(L.grid(), b, sp));
  if (b.nu_mass.sum() > 0.0) out.push_back(verify_eigen_identity(L, b, std::max(1e-6, opts.verify_tol)));
  return out;
}

SweepReport uniqueness_sweep(const DiscreteOperator& L, const SpectralPair& sp_d, const SpectralPair& sp_d0,
                             const ObstacleVector& h, const std::vector<double>& a_grid, int starts,
                             std::uint64_t seed, const SolveOptions& opts, unsigned jobs) {
  if (starts < 1) throw DomainError("uniqueness_sweep needs at least one start");
  std::vector<double> grid = a_grid;
  std::sort(grid.begin(), grid.end());
  for (double a : grid) {
    if (!(a > sp_d.lambda && a < sp_d0.lambda)) {
      throw DomainError("a = " + std::to_string(a) + " lies outside the existence window (" +
                        std::to_string(sp_d.lambda) + ", " + std::to_string(sp_d0.lambda) + ")");
    }
  }
  SolveOptions quiet = opts;
  quiet.verify = false;

  SweepReport rep;
  rep.points.resize(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    rep.points[p].a = grid[p];
    rep.points[p].runs.resize(static_cast<std::size_t>(starts));
  }
  const Vector base = scaled_ground_state(sp_d, h);

  // Start 0 (the scaled subsolution) first, so neighbours can seed later starts.
  parallel_for(grid.size(), jobs, [&](std::size_t p) {
    rep.points[p].runs[0] = monotone_solve(L, grid[p], h, base, quiet);
  });

  const std::size_t extra = static_cast<std::size_t>(starts - 1);
  parallel_for(grid.size() * extra, jobs, [&](std::size_t job) {
    const std::size_t p = job / extra;
    const int s = static_cast<int>(job % extra) + 1;
    Vector u0;
    if (s == 1) {
      u0 = 0.1 * base;
    } else if (s == 2) {
      // A solution for a smaller a is a subsolution here.
      const bool has_prev = p > 0 && rep.points[p - 1].runs[0].status == SolveStatus::converged;
      u0 = has_prev ? Vector(0.5 * rep.points[p - 1].runs[0].u) : Vector(0.3 * base);
    } else {
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (p * 64 + static_cast<std::size_t>(s) + 1)));
      std::uniform_real_distribution<double> unit(0.5, 1.5);
      u0 = base;
      for (Eigen::Index i = 0; i < u0.size(); ++i) {
        u0[i] *= unit(rng);
        const auto k = static_cast<std::size_t>(i);
        if (h.is_finite(k)) u0[i] = std::min(u0[i], h.values[k]);
      }
    }
    rep.points[p].runs[static_cast<std::size_t>(s)] = monotone_solve(L, grid[p], h, u0, quiet);
  });

  const OperatorFactorization factor(L);
  rep.all_converged = true;
  for (auto& pt : rep.points) {
    pt.all_converged = std::all_of(pt.runs.begin(), pt.runs.end(),
                                   [](const SolutionBundle& b) { return b.status == SolveStatus::converged; });
    rep.all_converged = rep.all_converged && pt.all_converged;
    pt.spectral_gap = std::abs(pt.a / sp_d.lambda - 1.0);
    double worst = -1.0;
    Vector worst_r;
    for (std::size_t i = 0; i < pt.runs.size(); ++i) {
      for (std::size_t j = i + 1; j < pt.runs.size(); ++j) {
        const Vector r = pt.runs[j].u - pt.runs[i].u;
        const double d = inf_norm(r) / std::max(inf_norm(pt.runs[i].u), 1e-300);
        pt.max_u_diff = std::max(pt.max_u_diff, d);
        pt.max_nu_tv_diff = std::max(pt.max_nu_tv_diff, (pt.runs[j].nu_mass - pt.runs[i].nu_mass).cwiseAbs().sum());
        if (d > worst) {
          worst = d;
          worst_r = r;
        }
      }
    }
    if (worst_r.size() > 0 && inf_norm(worst_r) > 0.0) {
      pt.fixed_point_defect = inf_norm(worst_r - pt.a * factor.solve(worst_r)) / inf_norm(worst_r);
    }
    rep.max_u_diff = std::max(rep.max_u_diff, pt.max_u_diff);
    rep.max_nu_tv_diff = std::max(rep.max_nu_tv_diff, pt.max_nu_tv_diff);
  }
  for (std::size_t p = 0; p + 1 < rep.points.size(); ++p) {
    const auto& lo = rep.points[p].runs[0];
    const auto& hi = rep.points[p + 1].runs[0];
    if (lo.status != SolveStatus::converged || hi.status != SolveStatus::converged) continue;
    rep.comparison_violation = std::max({rep.comparison_violation, (lo.u - hi.u).maxCoeff(),
                                         (lo.nu_mass - hi.nu_mass).maxCoeff()});
  }
  return rep;
}

}  // namespace fraclab
