#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fraclab/obstacle.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/potential.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/stable_mc.hpp"

#ifndef FRACLAB_VERSION
#define FRACLAB_VERSION "0.0.0"
#endif

namespace fraclab::harness {

namespace fs = std::filesystem;

namespace {

struct Setup {
  GridDomain grid;
  DiscreteOperator op;
  SpectralPair sp;
  std::optional<SpectralPair> sp0;
  ObstacleVector h;

  std::optional<double> lambda_d0() const {
    return sp0 ? std::optional<double>(sp0->lambda) : std::nullopt;
  }
};

Setup make_setup(const DomainSpec& spec, double alpha) {
  GridDomain g = build_domain(spec);
  DiscreteOperator op = assemble(g, alpha);
  SpectralPair sp = principal_eigenpair(op);
  std::optional<SpectralPair> sp0;
  if (g.has_inner_domain()) sp0 = inner_eigenpair(op);
  ObstacleVector h = g.has_inner_domain() ? build_obstacle(g) : ObstacleVector::unbounded(g.size());
  return {std::move(g), std::move(op), std::move(sp), std::move(sp0), std::move(h)};
}

void log_line(const RunOptions& o, const std::string& s) {
  if (o.log) *o.log << s << '\n';
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(8) << v;
  return os.str();
}

void write_json(const fs::path& path, const Json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

fs::path subdir(const RunOptions& o, const std::string& name) {
  fs::path p = o.out_dir / name;
  fs::create_directories(p);
  return p;
}

void write_profile(const fs::path& path, const GridDomain& g, const std::vector<std::pair<std::string, const Vector*>>& cols) {
  std::ofstream out(path);
  out << std::setprecision(17);
  out << (g.dim() == 1 ? "x" : "x,y");
  for (const auto& c : cols) out << ',' << c.first;
  out << '\n';
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << g.node(i)[0];
    if (g.dim() == 2) out << ',' << g.node(i)[1];
    for (const auto& c : cols) out << ',' << (*c.second)[static_cast<Eigen::Index>(i)];
    out << '\n';
  }
}

Json domain_json(const Setup& s) {
  Json j;
  j["dim"] = s.grid.dim();
  j["nodes"] = s.grid.size();
  j["spacing"] = s.grid.spacing();
  j["inner_nodes"] = s.grid.inner_count();
  j["alpha"] = s.op.alpha();
  j["levy_constant"] = s.op.levy_constant();
  j["lambda_D"] = s.sp.lambda;
  if (s.sp0) j["lambda_D0"] = s.sp0->lambda;
  return j;
}

std::optional<SolveStatus> expected_status(double a, double lo, std::optional<double> hi) {
  const double width = hi ? *hi - lo : lo;
  const double margin = 0.01 * width;
  if (a < lo - margin) return SolveStatus::trivial_zero;
  if (hi && a > lo + margin && a < *hi - margin) return SolveStatus::converged;
  if (a > (hi ? *hi : lo) + margin) return SolveStatus::diverged_no_supersolution;
  return std::nullopt;  // too close to a threshold to call
}

Vector start_for(const Setup& s, double a) {
  return a > s.sp.lambda ? initial_subsolution(s.sp, s.h, a) : scaled_ground_state(s.sp, s.h);
}

Json bundle_json(const SolutionBundle& b, const Setup& s, double contact_tol) {
  const double vol = s.grid.cell_volume();
  Json j;
  j["a"] = b.a;
  j["status"] = to_string(b.status);
  j["outer_iters"] = b.outer_iters;
  j["inner_iters_total"] = b.inner_iters_total;
  j["comp_residual"] = b.comp_residual;
  j["pde_residual"] = b.pde_residual;
  j["monotone_violation"] = b.monotone_violation;
  j["nu_monotone_violation"] = b.nu_monotone_violation;
  j["u_inf"] = b.u.cwiseAbs().maxCoeff();
  j["u_l1"] = b.u.cwiseAbs().sum() * vol;
  j["u_l2"] = std::sqrt(b.u.squaredNorm() * vol);
  j["nu_total"] = b.nu_mass.sum();
  std::vector<std::size_t> contact;
  for (std::size_t k = 0; k < s.h.size(); ++k) {
    if (s.h.is_finite(k) && std::abs(b.u[static_cast<Eigen::Index>(k)] - s.h.values[k]) < contact_tol) contact.push_back(k);
  }
  j["contact_nodes"] = contact;
  return j;
}

bool append_reports(Json& target, const std::vector<Report>& reports) {
  bool ok = true;
  target["reports"] = Json::array();
  for (const auto& r : reports) {
    target["reports"].push_back(to_json(r));
    ok = ok && r.passed();
  }
  return ok;
}

double diameter(const DomainSpec& d) {
  if (d.dim == 1) return d.bounds[1] - d.bounds[0];
  return std::hypot(d.bounds[1] - d.bounds[0], d.bounds[3] - d.bounds[2]);
}

Json estimate_json(const McEstimate& e, double oracle, double oracle_refined, bool& passed) {
  // dt bias: the coarse estimate uses the same paths at step 2 dt; with an
  // error of order dt^(1/2) the fine-grid bias is at most 2.5 times the gap.
  const double dt_band = 2.5 * std::abs(e.value - e.coarse_value);
  const double grid_band = 2.0 * std::abs(oracle - oracle_refined);
  const double band = dt_band + grid_band;
  const double err = std::abs(e.value - oracle);
  const bool ok = err <= 3.0 * e.std_error + band;
  passed = passed && ok;
  Json j;
  j["estimate"] = e.value;
  j["std_error"] = e.std_error;
  j["coarse_estimate"] = e.coarse_value;
  j["n_paths"] = e.n_paths;
  j["dt"] = e.dt;
  j["seed"] = e.seed;
  j["oracle"] = oracle;
  j["oracle_refined"] = oracle_refined;
  j["z_score"] = e.std_error > 0.0 ? (e.value - oracle) / e.std_error : 0.0;
  j["bias_band"] = band;
  j["passed"] = ok;
  return j;
}

Point centre_point(const GridDomain& g) { return g.node(g.centroid_node()); }

// First configured a strictly inside the window, else the window midpoint.
double window_a(const ProblemSpec& p, const Setup& s) {
  const double hi = s.sp0->lambda;
  for (double a : resolve_a_values(p, s.sp.lambda, hi)) {
    if (a > s.sp.lambda && a < hi) return a;
  }
  return 0.5 * (s.sp.lambda + hi);
}

}  // namespace

std::string version() { return FRACLAB_VERSION; }

// JSON has no infinities; spell them out so records round-trip.
static Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

Json to_json(const Report& r) {
  Json j;
  j["name"] = r.name;
  j["passed"] = r.passed();
  j["checks"] = Json::array();
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name}, {"value", number(c.value)}, {"threshold", number(c.threshold)}, {"passed", c.passed}});
  }
  return j;
}

Json manifest(const std::string& command, const RunConfig& cfg, bool passed) {
  std::ostringstream hash;
  hash << std::hex << std::setw(16) << std::setfill('0') << config_hash(cfg);
  Json j;
  j["command"] = command;
  j["version"] = version();
  j["config_hash"] = hash.str();
  j["seed"] = cfg.seed;
  j["passed"] = passed;
  j["config"] = serialize_config(cfg);
  return j;
}

RunResult run_eig(const RunConfig& cfg, const RunOptions& opts) {
  const Setup s = make_setup(cfg.domain, cfg.alpha);
  const fs::path dir = subdir(opts, "eig");
  RunResult res;
  res.record["command"] = "eig";
  res.record["domain"] = domain_json(s);
  res.record["residual_D"] = s.sp.residual;
  res.record["iterations_D"] = s.sp.iterations;
  write_profile(dir / "phi_D.csv", s.grid, {{"phi", &s.sp.phi}});
  log_line(opts, "lambda_1(D)  = " + num(s.sp.lambda));
  if (s.sp0) {
    res.record["residual_D0"] = s.sp0->residual;
    res.record["window"] = {s.sp.lambda, s.sp0->lambda};
    const GridDomain inner = s.grid.inner_domain();
    write_profile(dir / "phi_D0.csv", inner, {{"phi", &s.sp0->phi}});
    log_line(opts, "lambda_1(D0) = " + num(s.sp0->lambda));
    log_line(opts, "existence window: (" + num(s.sp.lambda) + ", " + num(s.sp0->lambda) + ")");
  }
  Report r{"spectral", {}};
  r.at_most("residual_D", s.sp.residual, 1e-10);
  if (s.sp0) {
    r.at_most("residual_D0", s.sp0->residual, 1e-10);
    r.above("window_nonempty", s.sp0->lambda - s.sp.lambda, 0.0);
  }
  res.passed = r.passed();
  res.record["reports"] = Json::array({to_json(r)});
  if (opts.dump_matrix) {
    std::ofstream out(dir / "operator_triplets.txt");
    s.op.write_triplets(out);
  }
  write_json(dir / "eig.json", res.record);
  return res;
}

RunResult run_solve(const RunConfig& cfg, const RunOptions& opts) {
  const Setup s = make_setup(cfg.domain, cfg.alpha);
  const SolveOptions so = solve_options(cfg.solver);
  const fs::path dir = subdir(opts, "solve");
  const auto a_values = resolve_a_values(cfg.problem, s.sp.lambda, s.lambda_d0());
  RunResult res;
  res.record["command"] = "solve";
  res.record["domain"] = domain_json(s);
  res.record["runs"] = Json::array();
  for (std::size_t k = 0; k < a_values.size(); ++k) {
    const double a = a_values[k];
    if (a < s.sp.lambda || (s.sp0 && a >= s.sp0->lambda)) {
      log_line(opts, "warning: a = " + num(a) + " lies outside the existence window; running as a detector");
    }
    const SolutionBundle b = monotone_solve(s.op, a, s.h, start_for(s, a), so);
    Json run = bundle_json(b, s, so.contact_tol);
    std::vector<Report> reports;
    if (b.status == SolveStatus::converged) reports = verify_all(s.op, s.h, b, s.sp, so);
    Report window{"window_status", {}};
    if (const auto want = expected_status(a, s.sp.lambda, s.lambda_d0())) {
      window.at_most("status_mismatch", b.status == *want ? 0.0 : 1.0, 0.0);
    }
    reports.push_back(window);
    res.passed = append_reports(run, reports) && res.passed;
    const std::string stem = "run_" + std::to_string(k);
    write_profile(dir / (stem + "_profile.csv"), s.grid, {{"u", &b.u}, {"nu", &b.nu_mass}});
    run["profile"] = stem + "_profile.csv";
    log_line(opts, "a = " + num(a) + ": " + to_string(b.status) + " after " + std::to_string(b.outer_iters) +
                       " outer iterations, |u|_inf = " + num(b.u.cwiseAbs().maxCoeff()) +
                       ", nu mass = " + num(b.nu_mass.sum()));
    res.record["runs"].push_back(std::move(run));
  }
  write_json(dir / "solve.json", res.record);
  return res;
}

RunResult run_sweep(const RunConfig& cfg, const RunOptions& opts) {
  const Setup s = make_setup(cfg.domain, cfg.alpha);
  if (!s.sp0) throw ConfigError("sweep needs an inner domain ([domain] inner)");
  SolveOptions so = solve_options(cfg.solver);
  so.verify = false;
  const fs::path dir = subdir(opts, "sweep");
  const auto a_values = resolve_a_values(cfg.problem, s.sp.lambda, s.lambda_d0());
  if (a_values.empty()) throw ConfigError("sweep needs at least one a value");
  const double lo = s.sp.lambda;
  const double hi = s.sp0->lambda;

  RunResult res;
  res.record["command"] = "sweep";
  res.record["domain"] = domain_json(s);

  // Existence detection: one solve per a from the scaled ground state.
  std::vector<SolutionBundle> detect(a_values.size());
  parallel_for(a_values.size(), opts.jobs, [&](std::size_t k) {
    detect[k] = monotone_solve(s.op, a_values[k], s.h, start_for(s, a_values[k]), so);
  });
  Report window{"existence_window", {}};
  double mismatches = 0.0;
  Json det = Json::array();
  for (std::size_t k = 0; k < a_values.size(); ++k) {
    const double a = a_values[k];
    const SolveStatus want = a < lo ? SolveStatus::trivial_zero
                             : a < hi ? SolveStatus::converged
                                      : SolveStatus::diverged_no_supersolution;
    // A status one grid step away from a threshold is tolerated.
    const double step = a_values.size() > 1 ? (a_values.back() - a_values.front()) / (a_values.size() - 1) : 0.0;
    const bool near = std::abs(a - lo) < step || std::abs(a - hi) < step;
    if (detect[k].status != want && !near) mismatches += 1.0;
    if (detect[k].status == SolveStatus::max_iter) mismatches += 1.0;
    det.push_back({{"a", a}, {"status", to_string(detect[k].status)}, {"expected", to_string(want)}});
  }
  window.at_most("status_mismatches", mismatches, 0.0);
  res.record["detection"] = det;

  std::vector<double> inside;
  for (double a : a_values) {
    if (a > lo && a < hi) inside.push_back(a);
  }
  std::vector<Report> reports{window};
  std::ofstream csv(dir / "sweep.csv");
  csv << std::setprecision(17) << "a,start,status,u_inf,u_l1,nu_total,max_pairwise_diff\n";
  if (!inside.empty()) {
    const SweepReport sw = uniqueness_sweep(s.op, s.sp, *s.sp0, s.h, inside, cfg.sweep.starts, cfg.seed, so, opts.jobs);
    Json pts = Json::array();
    for (const auto& p : sw.points) {
      pts.push_back({{"a", p.a},
                     {"all_converged", p.all_converged},
                     {"max_u_diff", p.max_u_diff},
                     {"max_nu_tv_diff", p.max_nu_tv_diff},
                     {"fixed_point_defect", p.fixed_point_defect},
                     {"spectral_gap", p.spectral_gap},
                     {"u_inf", p.runs[0].u.cwiseAbs().maxCoeff()}});
      for (std::size_t st = 0; st < p.runs.size(); ++st) {
        const auto& b = p.runs[st];
        csv << p.a << ',' << st << ',' << to_string(b.status) << ',' << b.u.cwiseAbs().maxCoeff() << ','
            << b.u.cwiseAbs().sum() * s.grid.cell_volume() << ',' << b.nu_mass.sum() << ',' << p.max_u_diff << '\n';
      }
      log_line(opts, "a = " + num(p.a) + ": max pairwise |u - u'|/|u| = " + num(p.max_u_diff) +
                         ", nu TV gap = " + num(p.max_nu_tv_diff));
    }
    res.record["uniqueness"] = pts;
    Report uq{"uniqueness", {}};
    uq.at_most("all_runs_converged", sw.all_converged ? 0.0 : 1.0, 0.0);
    uq.below("max_relative_u_diff", sw.max_u_diff, 1e-6);
    uq.below("max_nu_tv_diff", sw.max_nu_tv_diff, 1e-6);
    uq.at_most("comparison_violation", sw.comparison_violation, cfg.solver.verify_tol);
    reports.push_back(uq);
  }
  res.passed = append_reports(res.record, reports);
  write_json(dir / "sweep.json", res.record);
  return res;
}

RunResult run_potential(const RunConfig& cfg, const RunOptions& opts) {
  const Setup s = make_setup(cfg.domain, cfg.alpha);
  const fs::path dir = subdir(opts, "potential");
  RunResult res;
  res.record["command"] = "potential";
  res.record["domain"] = domain_json(s);

  const GreenMatrix G = green(s.op);
  const SpectralDecomposition dec(s.op);
  std::vector<Report> reports;

  Report kernel{"heat_kernel", {}};
  Json iu = Json::array();
  double prev_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> times = cfg.potential.times;
  std::sort(times.begin(), times.end());
  for (double t : times) {
    const RatioBounds c = iu_constants(heat_kernel(dec, t), s.sp);
    iu.push_back({{"t", t}, {"c1", c.c1}, {"c2", c.c2}, {"ratio", c.c2 / c.c1}});
    kernel.above("c1_positive_t" + num(t), c.c1, 0.0);
    kernel.below("c2_finite_t" + num(t), c.c2, std::numeric_limits<double>::infinity());
    kernel.below("c2_over_c1_decreasing_t" + num(t), c.c2 / c.c1, prev_ratio);
    prev_ratio = c.c2 / c.c1;
  }
  res.record["iu_constants"] = iu;
  kernel.at_most("resolvent_equation_0_1", resolvent_defect(s.op, 0.0, 1.0), 1e-8);
  kernel.at_most("resolvent_equation_1_2", resolvent_defect(s.op, 1.0, 2.0), 1e-8);
  kernel.at_most("laplace_transform_beta0", laplace_transform_defect(dec, 0.0), 0.01);
  kernel.at_most("laplace_transform_beta", laplace_transform_defect(dec, cfg.potential.beta), 0.01);
  kernel.above("green_min_entry", G.values.minCoeff(), 0.0);
  reports.push_back(kernel);

  Vector point = Vector::Zero(static_cast<Eigen::Index>(s.grid.size()));
  point[static_cast<Eigen::Index>(s.grid.centroid_node())] = 1.0;
  std::vector<double> ex_times{1e-3, 1e-2, 0.1, 1.0, 10.0};
  Report ex = excessive_check(G, dec, point, ex_times);
  ex.name = "excessive_point_mass";
  reports.push_back(ex);

  // Refinement study over the configured node counts.
  std::ofstream csv(dir / "constants.csv");
  csv << std::setprecision(10) << "n,alpha,c1,c2,C_triangle,C_3G,comparability_c2\n";
  const bool transient = s.grid.dim() > cfg.alpha;
  if (!transient) {
    const std::string why = "triangle constant refused: free-space Riesz kernel needs d > alpha (d = " +
                            std::to_string(s.grid.dim()) + ", alpha = " + num(cfg.alpha) + ")";
    log_line(opts, why);
    res.record["triangle_refused"] = why;
  }
  std::vector<double> tri;
  std::vector<double> comp;
  Json study = Json::array();
  for (int n : cfg.potential.refine) {
    DomainSpec spec = cfg.domain;
    for (auto& v : spec.n) v = n;
    const Setup r = make_setup(spec, cfg.alpha);
    const GreenMatrix Gr = green(r.op);
    Json row{{"n", n}};
    const RatioBounds c = iu_constants(heat_kernel(SpectralDecomposition(r.op), times.front()), r.sp);
    row["c1"] = c.c1;
    row["c2"] = c.c2;
    double ct = std::nan("");
    if (transient) {
      ct = triangle_constant(Gr, triangle_weight(Gr, r.grid, cfg.alpha));
      tri.push_back(ct);
      row["C_triangle"] = ct;
    }
    double c3 = std::nan("");
    double cc2 = std::nan("");
    if (r.sp0) {
      const double a = window_a(cfg.problem, r);
      SolveOptions so = solve_options(cfg.solver);
      so.verify = false;
      const SolutionBundle b = monotone_solve(r.op, a, r.h, start_for(r, a), so);
      if (b.status == SolveStatus::converged) {
        const Vector w = b.nu_mass / r.grid.cell_volume();
        const GreenMatrix Gn = green(r.op, 0.0, &w);
        const RatioBounds cb = comparability_constants(Gr, Gn);
        cc2 = cb.c2;
        c3 = threeG_constant(Gr, b.nu_mass);
        comp.push_back(cc2);
        row["comparability_c1"] = cb.c1;
        row["comparability_c2"] = cb.c2;
        row["C_3G"] = c3;
        Report order{"green_order_n" + std::to_string(n), {}};
        order.at_most("max_Gnu_minus_G", (Gn.values - Gr.values).maxCoeff(), 0.0);
        reports.push_back(order);
      }
    }
    csv << n << ',' << cfg.alpha << ',' << c.c1 << ',' << c.c2 << ',' << ct << ',' << c3 << ',' << cc2 << '\n';
    study.push_back(row);
  }
  res.record["refinement"] = study;
  auto spread = [](const std::vector<double>& v) {
    return v.empty() ? 1.0 : *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  Report stable{"refinement_stability", {}};
  if (tri.size() > 1) stable.at_most("triangle_max_over_min", spread(tri), 1.25);
  if (comp.size() > 1) stable.at_most("comparability_max_over_min", spread(comp), 1.25);
  reports.push_back(stable);

  res.passed = append_reports(res.record, reports);
  log_line(opts, std::string("potential checks ") + (res.passed ? "passed" : "FAILED"));
  write_json(dir / "potential.json", res.record);
  return res;
}

RunResult run_mc(const RunConfig& cfg, const RunOptions& opts) {
  const Setup s = make_setup(cfg.domain, cfg.alpha);
  const Setup fine = make_setup(refined(cfg.domain, 2), cfg.alpha);
  const fs::path dir = subdir(opts, "mc");
  RunResult res;
  res.record["command"] = "mc";
  res.record["domain"] = domain_json(s);

  McSettings ms;
  ms.alpha = cfg.alpha;
  ms.dt = cfg.mc.dt.value_or(1e-3 * std::pow(diameter(cfg.domain), cfg.alpha));
  ms.n_paths = cfg.mc.n_paths;
  ms.seed = cfg.seed;
  ms.jobs = opts.jobs;
  const Point x = centre_point(s.grid);
  res.record["x"] = {x[0], x[1]};

  bool ok = true;
  const auto oracle_at = [&](const Setup& st, const Vector& field) { return interpolate(st.grid, field, x); };
  {
    const double beta = cfg.mc.beta;
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(s.grid.size()));
    const Vector o = OperatorFactorization(s.op, Vector::Constant(ones.size(), beta)).solve(ones);
    const Vector onesf = Vector::Ones(static_cast<Eigen::Index>(fine.grid.size()));
    const Vector of = OperatorFactorization(fine.op, Vector::Constant(onesf.size(), beta)).solve(onesf);
    const McEstimate e = mc_resolvent(s.grid, [](const Point&) { return 1.0; }, x, beta, ms);
    res.record["resolvent"] = estimate_json(e, oracle_at(s, o), oracle_at(fine, of), ok);
    res.record["resolvent"]["beta"] = beta;
    log_line(opts, "resolvent: estimate " + num(e.value) + " +- " + num(e.std_error) + ", oracle " + num(oracle_at(s, o)));

    const McEstimate d = mc_dynkin(s.grid, o, [](const Point&) { return 1.0; }, x, cfg.mc.t, [&] {
      McSettings m = ms;
      m.seed = ms.seed + 1;
      return m;
    }());
    if (beta == 0.0) {
      res.record["dynkin"] = estimate_json(d, oracle_at(s, o), oracle_at(fine, of), ok);
      res.record["dynkin"]["t"] = cfg.mc.t;
    }
  }
  {
    // Ground state: e^(lambda t) E[phi(X_t); t < tau] = phi(x).
    SolutionBundle eb;
    eb.a = s.sp.lambda;
    eb.u = s.sp.phi;
    eb.nu_mass = Vector::Zero(s.sp.phi.size());
    const McEstimate e = mc_feynman_kac(s.grid, eb, x, cfg.mc.t, ms);
    res.record["ground_state"] = estimate_json(e, oracle_at(s, s.sp.phi), oracle_at(fine, fine.sp.phi), ok);
    res.record["ground_state"]["t"] = cfg.mc.t;
  }
  if (s.sp0) {
    SolveOptions so = solve_options(cfg.solver);
    so.verify = false;
    const double a = window_a(cfg.problem, s);
    const SolutionBundle b = monotone_solve(s.op, a, s.h, start_for(s, a), so);
    const SolutionBundle bf = monotone_solve(fine.op, a, fine.h, start_for(fine, a), so);
    if (b.status == SolveStatus::converged && bf.status == SolveStatus::converged) {
      const McEstimate e = mc_feynman_kac(s.grid, b, x, cfg.mc.t, ms);
      res.record["feynman_kac"] = estimate_json(e, oracle_at(s, b.u), oracle_at(fine, bf.u), ok);
      res.record["feynman_kac"]["a"] = a;
      res.record["feynman_kac"]["t"] = cfg.mc.t;
      log_line(opts, "feynman-kac: estimate " + num(e.value) + " +- " + num(e.std_error) + ", u(x) " +
                         num(oracle_at(s, b.u)));
    } else {
      log_line(opts, "feynman-kac skipped: a = " + num(a) + " did not give a converged solution");
      res.record["feynman_kac_skipped"] = to_string(b.status);
    }
  }
  res.passed = ok;
  write_json(dir / "mc.json", res.record);
  return res;
}

RunResult run_all(const RunConfig& cfg, const RunOptions& opts) {
  RunResult res;
  res.record["command"] = "all";
  const bool inner = cfg.domain.inner.has_value();
  for (const char* cmd : {"eig", "solve", "sweep", "potential", "mc"}) {
    const std::string c = cmd;
    if (c == "sweep" && !inner) continue;
    if (c == "solve" && !inner && !cfg.problem.a && cfg.problem.a_grid.empty()) continue;
    log_line(opts, "== " + c);
    RunResult r = run_command(c, cfg, opts);
    res.record[c] = {{"passed", r.passed}};
    res.passed = res.passed && r.passed;
  }
  write_json(opts.out_dir / "all.json", res.record);
  return res;
}

RunResult run_command(const std::string& command, const RunConfig& cfg, const RunOptions& opts) {
  if (command == "eig") return run_eig(cfg, opts);
  if (command == "solve") return run_solve(cfg, opts);
  if (command == "sweep") return run_sweep(cfg, opts);
  if (command == "potential") return run_potential(cfg, opts);
  if (command == "mc") return run_mc(cfg, opts);
  if (command == "all") return run_all(cfg, opts);
  throw ConfigError("unknown subcommand '" + command + "'");
}

}  // namespace fraclab::harness
