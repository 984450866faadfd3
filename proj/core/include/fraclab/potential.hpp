#pragma once

#include <optional>
#include <vector>

#include "fraclab/fracop.hpp"
#include "fraclab/report.hpp"
#include "fraclab/spectral.hpp"

namespace fraclab {

/// Kernel of the resolvent: values = (L + beta I + diag(w))^-1 / cell_volume,
/// so that (values * f) * cell_volume is the potential of the density f.
struct GreenMatrix {
  Matrix values;
  double beta = 0.0;
  std::optional<Vector> perturbation;
  double cell_volume = 1.0;
};

GreenMatrix green(const DiscreteOperator& L, double beta = 0.0, const Vector* w = nullptr);

/// Full eigendecomposition L = Q diag(lambda) Q^T, reused for heat kernels.
class SpectralDecomposition {
 public:
  explicit SpectralDecomposition(const DiscreteOperator& L);

  const Vector& eigenvalues() const { return lambda_; }
  const Matrix& eigenvectors() const { return q_; }
  double cell_volume() const { return vol_; }

  /// Q diag(g(lambda_k)) Q^T / cell_volume.
  template <typename Fn>
  Matrix kernel(Fn&& g) const {
    Vector s(lambda_.size());
    for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = g(lambda_[k]);
    return q_ * s.asDiagonal() * q_.transpose() / vol_;
  }

 private:
  Vector lambda_;
  Matrix q_;
  double vol_;
};

struct HeatKernel {
  double t = 0.0;
  Matrix values;  // p_D(t, x_i, x_j)
  double cell_volume = 1.0;
};

HeatKernel heat_kernel(const SpectralDecomposition& dec, double t);
HeatKernel heat_kernel(const DiscreteOperator& L, double t);

/// Applies the semigroup: (P_t f)_i = sum_j p(t, x_i, x_j) f_j vol.
Vector apply(const HeatKernel& p, const Vector& f);

struct RatioBounds {
  double c1 = 0.0;
  double c2 = 0.0;
};

/// min and max of p(t, x, y) / (phi(x) phi(y)).
RatioBounds iu_constants(const HeatKernel& p, const SpectralPair& sp);

/// Gamma((d - alpha)/2) / (2^alpha pi^(d/2) |Gamma(alpha/2)|); requires d > alpha.
double riesz_constant(int d, double alpha);

/// min(G(x, x0), c (r0/4)^(alpha - d)) with x0 the centroid node and r0 half the inradius.
Vector triangle_weight(const GreenMatrix& G, const GridDomain& g, double alpha);

/// Best constant C in rho(x, y) <= C max(rho(x, z), rho(z, y)), rho = w(x) w(y) / G(x, y),
/// by brute force over all triples of distinct nodes.
double triangle_constant(const GreenMatrix& G, const Vector& w);

/// Convenience: refuses d <= alpha, builds the default weight and the constant.
double triangle_constant(const DiscreteOperator& L);

/// c1 = min Gnu / G, c2 = max G / Gnu.
RatioBounds comparability_constants(const GreenMatrix& G, const GreenMatrix& Gnu);

/// max over (x, y) of sum_z G(x, z) G(z, y) mu_z / G(x, y), mu given as node masses.
double threeG_constant(const GreenMatrix& G, const Vector& mu);

/// P_t (R mu) <= R mu for each t, and P_t R mu increasing as t decreases.
Report excessive_check(const GreenMatrix& G, const SpectralDecomposition& dec, const Vector& mu,
                       const std::vector<double>& times, double tol = 1e-10);

/// max |G_beta - G_gamma - (gamma - beta) G_beta G_gamma vol| / max |G_beta|.
double resolvent_defect(const DiscreteOperator& L, double beta, double gamma);

/// Entrywise relative gap between G_beta and a log-t trapezoid quadrature of
/// the Laplace transform of the heat kernel.
double laplace_transform_defect(const SpectralDecomposition& dec, double beta, int points_per_decade = 40);

}  // namespace fraclab
