#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <variant>

#include "fraclab/domain.hpp"

namespace fraclab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Operators above this many nodes use sparse storage (classical Laplacian only).
inline constexpr std::size_t kDenseLimit = 4096;

/// Normalisation of the fractional Laplacian whose Fourier symbol is |xi|^alpha:
/// c = alpha 2^(alpha-1) Gamma((d+alpha)/2) / (pi^(d/2) Gamma(1-alpha/2)).
double levy_constant(int d, double alpha);

/// Matrix of -(Delta^{alpha/2})_{|D} with zero exterior condition, or of -Delta_D
/// for alpha = 2. Symmetric Z-matrix, positive definite. Immutable.
class DiscreteOperator {
 public:
  using Storage = std::variant<Matrix, SparseMatrix>;

  DiscreteOperator(std::shared_ptr<const GridDomain> grid, double alpha, Storage matrix, Vector kappa,
                   double levy_constant);

  double alpha() const { return alpha_; }
  double levy_constant() const { return levy_constant_; }
  const Vector& kappa() const { return kappa_; }
  const GridDomain& grid() const { return *grid_; }
  const std::shared_ptr<const GridDomain>& grid_ptr() const { return grid_; }
  std::size_t size() const { return grid_->size(); }

  bool is_dense() const { return std::holds_alternative<Matrix>(matrix_); }
  const Matrix& dense() const;
  const SparseMatrix& sparse() const;
  Matrix to_dense() const;

  double diagonal(std::size_t i) const { return diag_[static_cast<Eigen::Index>(i)]; }
  const Vector& diagonal() const { return diag_; }

  /// Row i of the matrix dotted with v, excluding the diagonal entry.
  double offdiag_dot(std::size_t i, const Vector& v) const;

  Vector apply(const Vector& u) const;

  /// Writes "row col value" lines (0-based) for every nonzero entry.
  void write_triplets(std::ostream& os) const;

 private:
  std::shared_ptr<const GridDomain> grid_;
  double alpha_;
  Storage matrix_;
  Vector kappa_;
  Vector diag_;
  double levy_constant_;
};

DiscreteOperator assemble_fractional(const GridDomain& g, double alpha);
DiscreteOperator assemble_classical(const GridDomain& g);

/// Dispatches on alpha: the classical Laplacian for alpha == 2.
DiscreteOperator assemble(const GridDomain& g, double alpha);

/// Closed-form killing rate of (a, b) in 1D: (c/alpha)[(x-a)^-alpha + (b-x)^-alpha].
double interval_killing_rate(double x, double a, double b, double alpha);

/// Cholesky factorisation of L + diag(shift), reused for repeated solves.
class OperatorFactorization {
 public:
  explicit OperatorFactorization(const DiscreteOperator& op);
  OperatorFactorization(const DiscreteOperator& op, const Vector& diag_shift);

  Vector solve(const Vector& rhs) const;
  std::size_t size() const { return n_; }

 private:
  void factor(const DiscreteOperator& op, const Vector* shift);

  std::size_t n_ = 0;
  std::variant<Eigen::LLT<Matrix>, std::shared_ptr<Eigen::SimplicialLLT<SparseMatrix>>> llt_;
};

}  // namespace fraclab
