#include "fraclab/spectral.hpp"

#include <cmath>
#include <string>

namespace fraclab {

namespace {

SpectralPair inverse_iteration(const DiscreteOperator& op, const Vector* w, const EigenOptions& opts) {
  const OperatorFactorization factor = w ? OperatorFactorization(op, *w) : OperatorFactorization(op);
  auto apply = [&](const Vector& x) -> Vector {
    Vector y = op.apply(x);
    if (w) y += w->cwiseProduct(x);
    return y;
  };

  const auto n = static_cast<Eigen::Index>(op.size());
  Vector x = Vector::Ones(n).normalized();
  SpectralPair sp;
  for (int it = 1; it <= opts.max_iter; ++it) {
    x = factor.solve(x).normalized();
    const Vector lx = apply(x);
    sp.lambda = x.dot(lx);
    sp.residual = (lx - sp.lambda * x).norm() / std::abs(sp.lambda);
    sp.iterations = it;
    if (sp.residual < opts.tol) break;
    if (it == opts.max_iter) {
      throw ConvergenceError("inverse iteration did not reach eigen-residual " + std::to_string(opts.tol) +
                             " (last " + std::to_string(sp.residual) + ")");
    }
  }
  if (x.sum() < 0.0) x = -x;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(x[i] > 0.0)) throw ConvergenceError("principal eigenvector is not strictly positive");
  }
  sp.phi = x / std::sqrt(op.grid().cell_volume());
  return sp;
}

}  // namespace

SpectralPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts) {
  return inverse_iteration(op, nullptr, opts);
}

SpectralPair principal_eigenpair_perturbed(const DiscreteOperator& op, const Vector& w, const EigenOptions& opts) {
  if (static_cast<std::size_t>(w.size()) != op.size()) throw DomainError("perturbation has wrong length");
  if ((w.array() < 0.0).any()) throw DomainError("perturbation density must be nonnegative");
  return inverse_iteration(op, &w, opts);
}

SpectralPair inner_eigenpair(const DiscreteOperator& op, const EigenOptions& opts) {
  return principal_eigenpair(assemble(op.grid().inner_domain(), op.alpha()), opts);
}

double alignment(const Vector& a, const Vector& b) { return std::abs(a.dot(b)) / (a.norm() * b.norm()); }

}  // namespace fraclab
