#include "fraclab/potential.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fraclab {

using boost::math::constants::pi;

GreenMatrix green(const DiscreteOperator& L, double beta, const Vector* w) {
  if (!(beta >= 0.0)) throw DomainError("resolvent parameter beta must be nonnegative");
  const auto n = static_cast<Eigen::Index>(L.size());
  Vector shift = Vector::Constant(n, beta);
  GreenMatrix G;
  G.beta = beta;
  G.cell_volume = L.grid().cell_volume();
  if (w) {
    if (w->size() != n) throw DomainError("perturbation has wrong length");
    if ((w->array() < 0.0).any()) throw DomainError("perturbation must be nonnegative");
    shift += *w;
    G.perturbation = *w;
  }
  Matrix m = L.to_dense();
  m.diagonal() += shift;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError("green: factorisation failed");
  G.values = llt.solve(Matrix::Identity(n, n)) / G.cell_volume;
  // Symmetrise away round-off so ratio tests compare like with like.
  G.values = 0.5 * (G.values + G.values.transpose()).eval();
  return G;
}

SpectralDecomposition::SpectralDecomposition(const DiscreteOperator& L) : vol_(L.grid().cell_volume()) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(L.to_dense());
  if (es.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed");
  lambda_ = es.eigenvalues();
  q_ = es.eigenvectors();
}

HeatKernel heat_kernel(const SpectralDecomposition& dec, double t) {
  if (!(t > 0.0)) throw DomainError("heat kernel time must be positive");
  return {t, dec.kernel([t](double l) { return std::exp(-t * l); }), dec.cell_volume()};
}

HeatKernel heat_kernel(const DiscreteOperator& L, double t) { return heat_kernel(SpectralDecomposition(L), t); }

Vector apply(const HeatKernel& p, const Vector& f) { return p.values * f * p.cell_volume; }

RatioBounds iu_constants(const HeatKernel& p, const SpectralPair& sp) {
  const Matrix ratio = p.values.array() / (sp.phi * sp.phi.transpose()).array();
  return {ratio.minCoeff(), ratio.maxCoeff()};
}

double riesz_constant(int d, double alpha) {
  if (!(d > alpha)) {
    throw DomainError("the free-space Riesz kernel needs d > alpha (got d = " + std::to_string(d) +
                      ", alpha = " + std::to_string(alpha) + "); the process is recurrent otherwise");
  }
  return std::tgamma((d - alpha) / 2.0) /
         (std::pow(2.0, alpha) * std::pow(pi<double>(), d / 2.0) * std::abs(std::tgamma(alpha / 2.0)));
}

Vector triangle_weight(const GreenMatrix& G, const GridDomain& g, double alpha) {
  const double c = riesz_constant(g.dim(), alpha);
  const double r0 = 0.5 * g.inradius();
  const double cap = c * std::pow(r0 / 4.0, alpha - g.dim());
  const auto x0 = static_cast<Eigen::Index>(g.centroid_node());
  return G.values.col(x0).cwiseMin(cap);
}

double triangle_constant(const GreenMatrix& G, const Vector& w) {
  const auto n = G.values.rows();
  if (w.size() != n) throw DomainError("weight has wrong length");
  if (!(w.array() > 0.0).all()) throw DomainError("triangle weight must be strictly positive");
  Matrix rho = (w * w.transpose()).array() / G.values.array();
  rho.diagonal().setZero();
  double best = 0.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = x + 1; y < n; ++y) {
      double leg = std::numeric_limits<double>::infinity();
      for (Eigen::Index z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        leg = std::min(leg, std::max(rho(z, x), rho(z, y)));
      }
      if (leg > 0.0 && std::isfinite(leg)) best = std::max(best, rho(x, y) / leg);
    }
  }
  return best;
}

double triangle_constant(const DiscreteOperator& L) {
  riesz_constant(L.grid().dim(), L.alpha());
  const GreenMatrix G = green(L);
  return triangle_constant(G, triangle_weight(G, L.grid(), L.alpha()));
}

RatioBounds comparability_constants(const GreenMatrix& G, const GreenMatrix& Gnu) {
  if (G.values.rows() != Gnu.values.rows()) throw DomainError("Green matrices differ in size");
  const Matrix r = Gnu.values.array() / G.values.array();
  return {r.minCoeff(), 1.0 / r.minCoeff()};
}

double threeG_constant(const GreenMatrix& G, const Vector& mu) {
  if (mu.size() != G.values.rows()) throw DomainError("measure has wrong length");
  if ((mu.array() < 0.0).any()) throw DomainError("measure must be nonnegative");
  const Matrix gg = G.values * mu.asDiagonal() * G.values;
  return (gg.array() / G.values.array()).maxCoeff();
}

Report excessive_check(const GreenMatrix& G, const SpectralDecomposition& dec, const Vector& mu,
                       const std::vector<double>& times, double tol) {
  Report r{"excessive", {}};
  const Vector pot = G.values * mu;
  const double scale = std::max(pot.cwiseAbs().maxCoeff(), 1e-300);
  std::vector<double> ts = times;
  std::sort(ts.begin(), ts.end());
  double above = 0.0;
  double non_monotone = 0.0;
  Vector previous;
  for (double t : ts) {
    const Vector pt = apply(heat_kernel(dec, t), pot);
    above = std::max(above, (pt - pot).maxCoeff() / scale);
    if (previous.size() > 0) non_monotone = std::max(non_monotone, (pt - previous).maxCoeff() / scale);
    previous = pt;
  }
  r.at_most("semigroup_above_potential", above, tol);
  r.at_most("increase_as_t_decreases_violation", non_monotone, tol);
  return r;
}

double resolvent_defect(const DiscreteOperator& L, double beta, double gamma) {
  const GreenMatrix gb = green(L, beta);
  const GreenMatrix gc = green(L, gamma);
  const Matrix lhs = gb.values - gc.values;
  const Matrix rhs = (gamma - beta) * gb.values * gc.values * gb.cell_volume;
  return (lhs - rhs).cwiseAbs().maxCoeff() / gb.values.cwiseAbs().maxCoeff();
}

double laplace_transform_defect(const SpectralDecomposition& dec, double beta, int points_per_decade) {
  const Vector& lam = dec.eigenvalues();
  const double t_min = 1e-3 / lam.maxCoeff();
  const double t_max = 40.0 / (lam.minCoeff() + beta);
  const double ds = std::log(10.0) / points_per_decade;
  const int steps = static_cast<int>(std::ceil(std::log(t_max / t_min) / ds));

  // The quadrature is linear in the kernel, so it can be applied mode by mode.
  auto weight = [&](double l) {
    const double mu = l + beta;
    double sum = 0.5 * t_min * (1.0 + std::exp(-mu * t_min));  // [0, t_min]
    for (int j = 0; j <= steps; ++j) {
      const double t = t_min * std::exp(j * ds);
      const double w = (j == 0 || j == steps) ? 0.5 : 1.0;
      sum += w * ds * t * std::exp(-mu * t);
    }
    return sum;
  };
  const Matrix quad = dec.kernel(weight);
  const Matrix exact = dec.kernel([beta](double l) { return 1.0 / (l + beta); });
  return ((quad - exact).array().abs() / exact.array().abs()).maxCoeff();
}

}  // namespace fraclab
