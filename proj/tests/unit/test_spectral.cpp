#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fraclab/spectral.hpp"

using namespace fraclab;

namespace {

double dense_min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void expect_normalised_positive(const SpectralPair& sp, double vol) {
  EXPECT_GT(sp.phi.minCoeff(), 0.0);
  EXPECT_NEAR(sp.phi.squaredNorm() * vol, 1.0, 1e-12);
  EXPECT_LT(sp.residual, 1e-9);
}

}  // namespace

TEST(Principal, ClassicalIntervalIsExactDiscreteSine) {
  const int n = 63;
  const GridDomain g = GridDomain::interval(0.0, 1.0, n);
  const DiscreteOperator L = assemble(g, 2.0);
  const SpectralPair sp = principal_eigenpair(L);
  const double h = g.spacing();
  const double exact = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
  EXPECT_NEAR(sp.lambda, exact, 1e-9 * exact);
  Vector s(n);
  for (int i = 0; i < n; ++i) s[i] = std::sin(std::numbers::pi * g.node(static_cast<std::size_t>(i))[0]);
  EXPECT_GT(alignment(sp.phi, s), 1.0 - 1e-12);
  expect_normalised_positive(sp, g.cell_volume());
}

class AgainstDenseSolver : public ::testing::TestWithParam<double> {};

TEST_P(AgainstDenseSolver, SmallestEigenvalueMatches) {
  const double alpha = GetParam();
  for (const GridDomain& g : {GridDomain::interval(-1.0, 1.0, 80),
                              GridDomain::rectangle(-1.0, 1.0, -1.0, 1.0, 12, 12)
                                  .with_mask(ball_predicate({0.0, 0.0}, 1.0))}) {
    const DiscreteOperator L = assemble(g, alpha);
    const SpectralPair sp = principal_eigenpair(L);
    const double ref = dense_min_eigenvalue(L.to_dense());
    EXPECT_NEAR(sp.lambda, ref, 1e-9 * ref);
    expect_normalised_positive(sp, g.cell_volume());
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, AgainstDenseSolver, ::testing::Values(0.4, 1.0, 1.6, 2.0));

TEST(Principal, CauchyProcessOnSymmetricInterval) {
  // Continuum value for alpha = 1 on (-1, 1) is 1.1577738836977...
  const double continuum = 1.1577738836977;
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {63, 127, 255}) {
    const double lambda = principal_eigenpair(assemble(GridDomain::interval(-1.0, 1.0, n), 1.0)).lambda;
    const double err = std::abs(lambda - continuum);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev / continuum, 5e-3);
}

TEST(Principal, ScalesWithTheDomain) {
  const double alpha = 0.7;
  const double unit = principal_eigenpair(assemble(GridDomain::interval(0.0, 1.0, 60), alpha)).lambda;
  const double wide = principal_eigenpair(assemble(GridDomain::interval(0.0, 2.0, 60), alpha)).lambda;
  EXPECT_NEAR(wide, std::pow(2.0, -alpha) * unit, 1e-9 * unit);
}

TEST(Principal, GroundStateIsSymmetricAndPeaksInTheMiddle) {
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 101);
  const SpectralPair sp = principal_eigenpair(assemble(g, 1.2));
  for (int i = 0; i < 101; ++i) EXPECT_NEAR(sp.phi[i], sp.phi[100 - i], 1e-8 * sp.phi.maxCoeff());
  Eigen::Index arg = 0;
  sp.phi.maxCoeff(&arg);
  EXPECT_EQ(arg, 50);
}

TEST(Perturbed, ConstantShiftAddsToLambda) {
  const DiscreteOperator L = assemble(GridDomain::interval(-1.0, 1.0, 70), 0.9);
  const SpectralPair base = principal_eigenpair(L);
  const SpectralPair shifted = principal_eigenpair_perturbed(L, Vector::Constant(70, 2.5));
  EXPECT_NEAR(shifted.lambda, base.lambda + 2.5, 1e-9 * shifted.lambda);
  EXPECT_GT(alignment(base.phi, shifted.phi), 1.0 - 1e-10);
}

TEST(Perturbed, RandomPotentialAgainstDenseSolver) {
  const DiscreteOperator L = assemble(GridDomain::interval(-1.0, 1.0, 60), 1.4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  Vector w(60);
  for (int i = 0; i < 60; ++i) w[i] = (i > 20 && i < 40) ? u(rng) : 0.0;
  const SpectralPair sp = principal_eigenpair_perturbed(L, w);
  Matrix M = L.to_dense();
  M.diagonal() += w;
  const double ref = dense_min_eigenvalue(M);
  EXPECT_NEAR(sp.lambda, ref, 1e-9 * ref);
  EXPECT_GT(sp.lambda, principal_eigenpair(L).lambda);
  EXPECT_THROW(principal_eigenpair_perturbed(L, Vector::Constant(60, -1.0)), DomainError);
  EXPECT_THROW(principal_eigenpair_perturbed(L, Vector::Zero(5)), DomainError);
}

TEST(Inner, MatchesFreshAssemblyAndDomainMonotonicity) {
  const GridDomain g =
      GridDomain::interval(-1.0, 1.0, 127).with_inner_domain(box_predicate({-0.5, -1.0}, {0.5, 1.0}));
  const DiscreteOperator L = assemble(g, 1.0);
  const SpectralPair inner = inner_eigenpair(L);
  const double fresh = principal_eigenpair(assemble(g.inner_domain(), 1.0)).lambda;
  EXPECT_NEAR(inner.lambda, fresh, 1e-12 * fresh);
  const double outer = principal_eigenpair(L).lambda;
  EXPECT_GT(inner.lambda, outer);
  // The D0 grid spans (-1/2 - h, 1/2 + h); eigenvalues scale like length^-alpha.
  const double expected = 2.0 / (1.0 + 2.0 * g.spacing());
  EXPECT_NEAR(inner.lambda / outer, expected, 0.01 * expected);
  EXPECT_THROW(inner_eigenpair(assemble(GridDomain::interval(0.0, 1.0, 10), 1.0)), DomainError);
}

TEST(Alignment, Basics) {
  Vector a(3);
  a << 1.0, 2.0, 3.0;
  EXPECT_NEAR(alignment(a, 2.0 * a), 1.0, 1e-15);
  EXPECT_NEAR(alignment(a, -a), 1.0, 1e-15);
  Vector b(3);
  b << 3.0, 0.0, -1.0;
  EXPECT_NEAR(alignment(a, b), 0.0, 1e-15);
}

TEST(Principal, BudgetExhaustionThrows) {
  const DiscreteOperator L = assemble(GridDomain::interval(-1.0, 1.0, 64), 1.0);
  EXPECT_THROW(principal_eigenpair(L, {1e-15, 1}), ConvergenceError);
}
