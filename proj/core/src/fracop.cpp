#include "fraclab/fracop.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace fraclab {

namespace {

using boost::math::constants::pi;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError("fractional order alpha must lie in (0, 2), got " + std::to_string(alpha));
  }
}

// Antiderivative pair for the 1D kernel t^(-1-alpha) in grid units:
// phi'' = t^(-1-alpha), phi'(t) = -t^(-alpha)/alpha.
double phi(double t, double alpha) {
  if (alpha == 1.0) return -std::log(t);
  return std::pow(t, 1.0 - alpha) / (alpha * (alpha - 1.0));
}

// phi(k) - phi(k-1), written to avoid cancellation for large k.
double phi_step(double k, double alpha) {
  if (alpha == 1.0) return std::log1p(-1.0 / k);
  const double beta = 1.0 - alpha;
  return -std::pow(k, beta) * std::expm1(beta * std::log1p(-1.0 / k)) / (alpha * (alpha - 1.0));
}

// Weight of the hat function centred k cells away; k = 1 also carries the
// Taylor near-field contribution of the singular cell.
double hat_weight_1d(int k, double alpha) {
  if (k == 1) return 1.0 / (2.0 - alpha) + 1.0 / alpha + phi(2.0, alpha) - phi(1.0, alpha);
  const double kk = k;
  if (alpha == 1.0) return -std::log1p(1.0 / kk) - std::log1p(-1.0 / kk);
  const double beta = 1.0 - alpha;
  const double second = std::expm1(beta * std::log1p(1.0 / kk)) + std::expm1(beta * std::log1p(-1.0 / kk));
  return std::pow(kk, beta) * second / (alpha * (alpha - 1.0));
}

// Half hat of the boundary point i cells away, restricted to the inside of D.
double boundary_hat_weight_1d(int i, double alpha) {
  if (i == 1) return 1.0 / (2.0 - alpha);
  const double ii = i;
  return -std::pow(ii, -alpha) / alpha - phi_step(ii, alpha);
}

double cell_integral_2d(int dx, int dy, double alpha) {
  const double p = -(2.0 + alpha) / 2.0;
  auto inner = [&](double x, auto&& integrate) {
    return integrate([&](double y) { return std::pow(x * x + y * y, p); }, dy - 0.5, dy + 0.5);
  };
  if (std::max(std::abs(dx), std::abs(dy)) >= 4) {
    using G = boost::math::quadrature::gauss<double, 20>;
    auto integ = [](auto f, double a, double b) { return G::integrate(f, a, b); };
    return G::integrate([&](double x) { return inner(x, integ); }, dx - 0.5, dx + 0.5);
  }
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto integ = [](auto f, double a, double b) { return GK::integrate(f, a, b, 15, 1e-14); };
  return GK::integrate([&](double x) { return inner(x, integ); }, dx - 0.5, dx + 0.5, 15, 1e-14);
}

double cos_power_octant(double power) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  return GK::integrate([power](double t) { return std::pow(std::cos(t), power); }, 0.0, pi<double>() / 4.0, 15,
                       1e-15);
}

DiscreteOperator assemble_fractional_1d(const GridDomain& g, double alpha) {
  const auto n = static_cast<int>(g.size());
  const double h = g.spacing();
  const double c = levy_constant(1, alpha);
  const double scale = c * std::pow(h, -alpha);
  const auto [a, b] = g.bounds();

  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) w[static_cast<std::size_t>(k)] = hat_weight_1d(k, alpha);

  Matrix m(n, n);
  Vector kappa(n);
  for (int i = 0; i < n; ++i) {
    kappa[i] = interval_killing_rate(g.node(static_cast<std::size_t>(i))[0], a, b, alpha);
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double wij = w[static_cast<std::size_t>(std::abs(i - j))];
      m(i, j) = -scale * wij;
      row += wij;
    }
    row += boundary_hat_weight_1d(i + 1, alpha) + boundary_hat_weight_1d(n - i, alpha);
    m(i, i) = scale * row + kappa[i];
  }
  return {std::make_shared<const GridDomain>(g), alpha, std::move(m), std::move(kappa), c};
}

DiscreteOperator assemble_fractional_2d(const GridDomain& g, double alpha) {
  const auto n = g.size();
  const double h = g.spacing();
  const double c = levy_constant(2, alpha);
  const double scale = c * std::pow(h, -alpha);
  const auto& lat = g.lattice();

  int max_dx = 0;
  int max_dy = 0;
  for (const auto& l : lat) {
    max_dx = std::max(max_dx, l[0]);
    max_dy = std::max(max_dy, l[1]);
  }
  const int span = std::max(max_dx, max_dy) + 1;
  // Cell integrals of |z|^(-2-alpha) in grid units, symmetric in both offsets.
  Matrix table = Matrix::Zero(span, span);
  for (int dx = 0; dx < span; ++dx) {
    for (int dy = 0; dy <= dx; ++dy) {
      if (dx == 0 && dy == 0) continue;
      table(dx, dy) = table(dy, dx) = cell_integral_2d(dx, dy, alpha);
    }
  }
  const double half = 0.5;
  // Exterior of the own cell, and the second moment of the own cell.
  const double tail = 8.0 * std::pow(half, -alpha) / alpha * cos_power_octant(alpha);
  const double moment = 8.0 / (2.0 - alpha) * std::pow(half, 2.0 - alpha) * cos_power_octant(alpha - 2.0);
  const double near = moment / 4.0;

  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vector kappa(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double interior = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const int dx = std::abs(lat[i][0] - lat[j][0]);
      const int dy = std::abs(lat[i][1] - lat[j][1]);
      const double wij = table(dx, dy);
      interior += wij;
      const bool neighbour = dx + dy == 1;
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = -scale * (wij + (neighbour ? near : 0.0));
    }
    const auto ii = static_cast<Eigen::Index>(i);
    kappa[ii] = scale * (tail - interior);
    // Neighbour weights of the near field sum to `moment` whether or not the
    // neighbour is inside D (exterior values are zero).
    m(ii, ii) = scale * (interior + moment) + kappa[ii];
  }
  return {std::make_shared<const GridDomain>(g), alpha, std::move(m), std::move(kappa), c};
}

}  // namespace

double levy_constant(int d, double alpha) {
  return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma((d + alpha) / 2.0) /
         (std::pow(pi<double>(), d / 2.0) * std::tgamma(1.0 - alpha / 2.0));
}

double interval_killing_rate(double x, double a, double b, double alpha) {
  return levy_constant(1, alpha) / alpha * (std::pow(x - a, -alpha) + std::pow(b - x, -alpha));
}

DiscreteOperator::DiscreteOperator(std::shared_ptr<const GridDomain> grid, double alpha, Storage matrix, Vector kappa,
                                   double levy_constant)
    : grid_(std::move(grid)),
      alpha_(alpha),
      matrix_(std::move(matrix)),
      kappa_(std::move(kappa)),
      levy_constant_(levy_constant) {
  if (is_dense()) {
    diag_ = std::get<Matrix>(matrix_).diagonal();
  } else {
    diag_ = std::get<SparseMatrix>(matrix_).diagonal();
  }
}

const Matrix& DiscreteOperator::dense() const {
  if (!is_dense()) throw DomainError("operator uses sparse storage");
  return std::get<Matrix>(matrix_);
}

const SparseMatrix& DiscreteOperator::sparse() const {
  if (is_dense()) throw DomainError("operator uses dense storage");
  return std::get<SparseMatrix>(matrix_);
}

Matrix DiscreteOperator::to_dense() const {
  if (is_dense()) return dense();
  return Matrix(sparse());
}

double DiscreteOperator::offdiag_dot(std::size_t i, const Vector& v) const {
  const auto ii = static_cast<Eigen::Index>(i);
  if (is_dense()) {
    // Symmetric: column i is row i and is contiguous in memory.
    return dense().col(ii).dot(v) - diag_[ii] * v[ii];
  }
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(sparse(), ii); it; ++it) {
    if (it.row() != ii) s += it.value() * v[it.row()];
  }
  return s;
}

Vector DiscreteOperator::apply(const Vector& u) const {
  if (static_cast<std::size_t>(u.size()) != size()) {
    throw DomainError("apply: vector length " + std::to_string(u.size()) + " does not match operator size " +
                      std::to_string(size()));
  }
  if (is_dense()) return dense() * u;
  return sparse() * u;
}

void DiscreteOperator::write_triplets(std::ostream& os) const {
  os << std::setprecision(17);
  if (is_dense()) {
    const auto& m = dense();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (m(i, j) != 0.0) os << i << ' ' << j << ' ' << m(i, j) << '\n';
      }
    }
    return;
  }
  const auto& s = sparse();
  for (Eigen::Index j = 0; j < s.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(s, j); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  }
}

DiscreteOperator assemble_fractional(const GridDomain& g, double alpha) {
  check_alpha(alpha);
  if (g.size() > kDenseLimit) {
    throw DomainError("fractional operators are dense; at most " + std::to_string(kDenseLimit) + " nodes supported");
  }
  return g.dim() == 1 ? assemble_fractional_1d(g, alpha) : assemble_fractional_2d(g, alpha);
}

DiscreteOperator assemble_classical(const GridDomain& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  const double centre = 2.0 * g.dim() * inv_h2;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) * (2 * g.dim() + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    entries.emplace_back(i, i, centre);
    for (const auto& nb : g.neighbours(g.lattice()[static_cast<std::size_t>(i)])) {
      if (auto j = g.index_of(nb)) entries.emplace_back(i, static_cast<Eigen::Index>(*j), -inv_h2);
    }
  }
  SparseMatrix s(n, n);
  s.setFromTriplets(entries.begin(), entries.end());
  auto grid = std::make_shared<const GridDomain>(g);
  if (g.size() <= kDenseLimit) return {grid, 2.0, Matrix(s), Vector::Zero(n), 1.0};
  s.makeCompressed();
  return {grid, 2.0, std::move(s), Vector::Zero(n), 1.0};
}

DiscreteOperator assemble(const GridDomain& g, double alpha) {
  if (alpha == 2.0) return assemble_classical(g);
  return assemble_fractional(g, alpha);
}

OperatorFactorization::OperatorFactorization(const DiscreteOperator& op) { factor(op, nullptr); }

OperatorFactorization::OperatorFactorization(const DiscreteOperator& op, const Vector& diag_shift) {
  if (static_cast<std::size_t>(diag_shift.size()) != op.size()) throw DomainError("diagonal shift has wrong length");
  factor(op, &diag_shift);
}

void OperatorFactorization::factor(const DiscreteOperator& op, const Vector* shift) {
  n_ = op.size();
  if (op.is_dense()) {
    Matrix m = op.dense();
    if (shift) m.diagonal() += *shift;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) throw DomainError("Cholesky factorisation failed: matrix is not SPD");
    llt_ = std::move(llt);
    return;
  }
  SparseMatrix m = op.sparse();
  if (shift) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) += (*shift)[i];
  }
  auto llt = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(m);
  if (llt->info() != Eigen::Success) throw DomainError("sparse Cholesky factorisation failed");
  llt_ = std::move(llt);
}

Vector OperatorFactorization::solve(const Vector& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != n_) throw DomainError("solve: right-hand side has wrong length");
  if (const auto* dense = std::get_if<Eigen::LLT<Matrix>>(&llt_)) return dense->solve(rhs);
  return std::get<1>(llt_)->solve(rhs);
}

}  // namespace fraclab
