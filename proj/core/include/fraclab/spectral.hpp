#pragma once

#include "fraclab/fracop.hpp"

namespace fraclab {

/// Thrown when an iterative method exhausts its iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Principal eigenpair of an SPD Z-matrix operator.
///
/// `phi` is positive at every node and normalised in L^2(D; m), i.e.
/// sum_i phi_i^2 * cell_volume = 1. `residual` is the relative eigen-residual
/// ||L phi - lambda phi||_2 / (lambda ||phi||_2).
struct SpectralPair {
  double lambda = 0.0;
  Vector phi;
  double residual = 0.0;
  int iterations = 0;
};

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 20000;
};

/// Inverse power iteration from the all-ones vector with a single Cholesky
/// factorisation.
SpectralPair principal_eigenpair(const DiscreteOperator& op, const EigenOptions& opts = {});

/// Principal eigenpair of L + diag(w) for a nonnegative density w.
SpectralPair principal_eigenpair_perturbed(const DiscreteOperator& op, const Vector& w,
                                           const EigenOptions& opts = {});

/// lambda_1 of the operator assembled afresh on the D0 nodes of `op`'s grid.
SpectralPair inner_eigenpair(const DiscreteOperator& op, const EigenOptions& opts = {});

/// |cos| of the angle between two vectors.
double alignment(const Vector& a, const Vector& b);

}  // namespace fraclab
