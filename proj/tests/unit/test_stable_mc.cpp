#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fraclab/potential.hpp"
#include "fraclab/stable_mc.hpp"

using namespace fraclab;

namespace {

// Empirical E cos(xi Z) against the characteristic function; the standard
// error of a mean of cosines is at most 1/sqrt(N).
void expect_characteristic_function(double alpha, auto&& draw, double scale_pow) {
  const int n = 200000;
  Rng rng(123);
  std::vector<double> z(n);
  for (auto& v : z) v = draw(rng);
  for (double xi : {0.3, 1.0, 2.5}) {
    double s = 0.0;
    for (double v : z) s += std::cos(xi * v);
    const double expected = std::exp(-scale_pow * std::pow(xi, alpha));
    EXPECT_NEAR(s / n, expected, 5.0 / std::sqrt(n)) << "alpha " << alpha << " xi " << xi;
  }
}

}  // namespace

class StableSamplers : public ::testing::TestWithParam<double> {};

TEST_P(StableSamplers, SymmetricCharacteristicFunction) {
  const double alpha = GetParam();
  expect_characteristic_function(alpha, [&](Rng& r) { return sample_symmetric_stable(alpha, r); }, 1.0);
}

TEST_P(StableSamplers, StepScalesWithTime) {
  const double alpha = GetParam();
  const double dt = 0.01;
  expect_characteristic_function(alpha, [&](Rng& r) { return sample_stable_step(alpha, dt, 1, r)[0]; }, dt);
}

TEST_P(StableSamplers, PlanarStepIsIsotropic) {
  const double alpha = GetParam();
  const double dt = 0.5;
  // Projection on the x axis and on the diagonal share the characteristic function.
  expect_characteristic_function(alpha, [&](Rng& r) { return sample_stable_step(alpha, dt, 2, r)[0]; }, dt);
  expect_characteristic_function(
      alpha,
      [&](Rng& r) {
        const Point p = sample_stable_step(alpha, dt, 2, r);
        return (p[0] + p[1]) / std::sqrt(2.0);
      },
      dt);
}

INSTANTIATE_TEST_SUITE_P(Alphas, StableSamplers, ::testing::Values(0.5, 1.0, 1.5, 2.0));

TEST(PositiveStable, LaplaceTransform) {
  for (double rho : {0.25, 0.5, 0.75}) {
    const int n = 200000;
    Rng rng(5);
    std::vector<double> a(n);
    for (auto& v : a) v = sample_positive_stable(rho, rng);
    EXPECT_GT(*std::min_element(a.begin(), a.end()), 0.0);
    for (double s : {0.2, 1.0, 3.0}) {
      double m = 0.0;
      for (double v : a) m += std::exp(-s * v);
      EXPECT_NEAR(m / n, std::exp(-std::pow(s, rho)), 5.0 / std::sqrt(n)) << rho << " " << s;
    }
  }
  Rng rng(1);
  EXPECT_THROW(sample_positive_stable(1.0, rng), DomainError);
  EXPECT_THROW(sample_symmetric_stable(2.1, rng), DomainError);
  EXPECT_THROW(sample_stable_step(1.0, 0.0, 1, rng), DomainError);
}

TEST(Rng, PathStreamsAreReproducibleAndDistinct) {
  Rng a = path_rng(2026, 7);
  Rng b = path_rng(2026, 7);
  Rng c = path_rng(2026, 8);
  Rng d = path_rng(2027, 7);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
  EXPECT_NE(path_rng(1, std::uint64_t{1} << 32)(), path_rng(1, 0)());
}

TEST(Paths, KilledAtFirstExit) {
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 31);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const KilledPath p = simulate_killed(g, {0.3, 0.0}, 1.0, 0.01, 5.0, rng);
    ASSERT_EQ(p.times.size(), p.positions.size());
    ASSERT_EQ(p.times.size(), p.alive_mask.size());
    for (std::size_t i = 0; i + 1 < p.alive_mask.size(); ++i) EXPECT_TRUE(p.alive_mask[i]);
    if (std::isfinite(p.exit_time)) {
      EXPECT_FALSE(p.alive_mask.back());
      EXPECT_GE(std::abs(p.positions.back()[0]), 1.0);
      EXPECT_DOUBLE_EQ(p.exit_time, p.times.back());
    } else {
      EXPECT_NEAR(p.times.back(), 5.0, 1e-9);
    }
  }
  EXPECT_THROW(simulate_killed(g, {1.5, 0.0}, 1.0, 0.01, 1.0, rng), DomainError);
}

TEST(Paths, MeanExitTimeOfTheCauchyProcess) {
  // E_0 tau = (1 - x^2)^{1/2} / 1 for alpha = 1 on (-1, 1): the torsion
  // function has constant image 1 under the half-Laplacian.
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 63);
  McSettings s;
  s.alpha = 1.0;
  s.dt = 1e-3;
  s.n_paths = 20000;
  s.seed = 31;
  const McEstimate e = mc_resolvent(g, [](const Point&) { return 1.0; }, {0.0, 0.0}, 0.0, s);
  EXPECT_NEAR(e.value, 1.0, 4.0 * e.std_error + 2.0 * std::abs(e.value - e.coarse_value) + 0.005);
}

TEST(Interpolation, LinearAndBilinear) {
  const GridDomain g = GridDomain::interval(0.0, 1.0, 9);
  Vector v(9);
  for (int i = 0; i < 9; ++i) v[i] = 2.0 + 3.0 * g.node(static_cast<std::size_t>(i))[0];
  EXPECT_NEAR(interpolate(g, v, {0.45, 0.0}), 2.0 + 3.0 * 0.45, 1e-14);
  EXPECT_NEAR(interpolate(g, v, {0.3, 0.0}), 2.9, 1e-14);
  EXPECT_EQ(interpolate(g, v, {1.5, 0.0}), 0.0);
  // Between the last node and the boundary the value falls to zero linearly.
  EXPECT_NEAR(interpolate(g, v, {0.95, 0.0}), 0.5 * v[8], 1e-14);
  EXPECT_EQ(cell_value(g, v, {0.31, 0.0}), v[2]);
  EXPECT_EQ(cell_value(g, v, {-0.2, 0.0}), 0.0);

  const GridDomain sq = GridDomain::rectangle(0.0, 1.0, 0.0, 1.0, 8, 8);
  Vector w(64);
  for (std::size_t i = 0; i < 64; ++i) w[static_cast<Eigen::Index>(i)] = 1.0 + sq.node(i)[0] - 2.0 * sq.node(i)[1];
  EXPECT_NEAR(interpolate(sq, w, {0.4, 0.55}), 1.0 + 0.4 - 1.1, 1e-13);
  EXPECT_EQ(cell_value(sq, w, {0.3, 0.3}), w[static_cast<Eigen::Index>(*sq.index_of({2, 2}))]);
  EXPECT_THROW(interpolate(sq, v, {0.5, 0.5}), DomainError);
}

TEST(PairwiseSum, ExactOnIntegersAndOrderDefined) {
  std::vector<double> x(1001);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  EXPECT_EQ(pairwise_sum(x.data(), x.size()), 500500.0);
  EXPECT_EQ(pairwise_sum(x.data(), 0), 0.0);
  std::vector<double> small(100000, 0.1);
  EXPECT_NEAR(pairwise_sum(small.data(), small.size()), 10000.0, 1e-9);
}

TEST(Estimators, BitwiseReproducibleAcrossThreadCounts) {
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 31);
  McSettings s;
  s.alpha = 1.5;
  s.dt = 1e-2;
  s.n_paths = 5000;
  s.seed = 99;
  auto f = [](const Point& p) { return 1.0 + p[0]; };
  s.jobs = 1;
  const McEstimate one = mc_resolvent(g, f, {0.2, 0.0}, 0.5, s);
  s.jobs = 3;
  const McEstimate three = mc_resolvent(g, f, {0.2, 0.0}, 0.5, s);
  EXPECT_EQ(one.value, three.value);
  EXPECT_EQ(one.std_error, three.std_error);
  EXPECT_EQ(one.coarse_value, three.coarse_value);
  s.seed = 100;
  EXPECT_NE(mc_resolvent(g, f, {0.2, 0.0}, 0.5, s).value, one.value);
  EXPECT_EQ(one.n_paths, 5000);
  EXPECT_GT(one.std_error, 0.0);
  s.n_paths = 0;
  EXPECT_THROW(mc_resolvent(g, f, {0.2, 0.0}, 0.5, s), DomainError);
}

TEST(Estimators, DynkinFormulaForAResolventPotential) {
  // u = L^-1 f on the grid; E[u(X_{t ^ tau}) + int_0^{t ^ tau} f] = u(x).
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 127);
  const DiscreteOperator L = assemble(g, 1.0);
  const Vector f = Vector::Ones(127);
  const Vector u = OperatorFactorization(L).solve(f);
  McSettings s;
  s.alpha = 1.0;
  s.dt = 1e-3;
  s.n_paths = 20000;
  s.seed = 4;
  const McEstimate e = mc_dynkin(g, u, [](const Point&) { return 1.0; }, {0.1, 0.0}, 0.2, s);
  const double target = interpolate(g, u, {0.1, 0.0});
  EXPECT_NEAR(e.value, target, 4.0 * e.std_error + 2.0 * std::abs(e.value - e.coarse_value) + 0.01);
}

TEST(Estimators, FeynmanKacWithoutReactionIsTheSemigroup) {
  // With nu = 0 and a = 0 the weight is P_t u.
  const GridDomain g = GridDomain::interval(-1.0, 1.0, 63);
  const DiscreteOperator L = assemble(g, 1.0);
  const SpectralPair sp = principal_eigenpair(L);
  SolutionBundle b;
  b.u = sp.phi;
  b.nu_mass = Vector::Zero(63);
  b.a = sp.lambda;
  McSettings s;
  s.alpha = 1.0;
  s.dt = 1e-3;
  s.n_paths = 20000;
  s.seed = 8;
  // e^(lambda t) P_t phi = phi.
  const McEstimate e = mc_feynman_kac(g, b, {0.0, 0.0}, 0.2, s);
  const double target = sp.phi[31];
  EXPECT_NEAR(e.value, target, 4.0 * e.std_error + 2.0 * std::abs(e.value - e.coarse_value) + 0.01 * target);
}
