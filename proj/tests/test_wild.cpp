#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "kacgraze/analysis.hpp"
#include "kacgraze/wild.hpp"

using namespace kacgraze;

namespace {

double sup_diff(const SpectralDensity& a, const SpectralDensity& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  return worst;
}

}  // namespace

TEST(CollisionTable, WeightsSumToOneHalf) {
  const ModelParams par(0.5, 1.0);
  const CollisionTable t(XiGrid(1e-3, 10.0, 32), make_kernel(0.4), par);
  double s = 0.0;
  for (double w : t.weights()) s += w;
  EXPECT_NEAR(s, 0.5, 1e-15);
}

TEST(Qplus, FixesConstantsAndIsSymmetric) {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const CollisionTable table(g, k, par);
  const SpectralDensity one(g, std::vector<double>(g.size(), 1.0), 2.0);
  const auto q1 = qplus(one, one, table);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(q1[j], 1.0, 1e-14);

  const auto a = sample_spectral(InitialDatum::mixture(), par, g);
  const auto b = sample_spectral(InitialDatum::gaussian(), par, g);
  const auto ab = qplus(a, b, table);
  const auto ba = qplus(b, a, table);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(ab[j], ba[j]);
}

TEST(Qplus, EquilibriumIsNearlyInvariant) {
  // For p = 1, cos^2 + sin^2 = 1, so M(xi c) M(xi s) = M(xi) pointwise and only
  // interpolation error remains.
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const auto m = sample_spectral(InitialDatum::equilibrium(), par, g);
  const auto q = qplus(m, m, k, par);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(q[j], m[j], 1e-6) << g[j];
  }
}

TEST(WildSolver, StepOfZeroIsIdentityAndGuardsStepSize) {
  const ModelParams par(0.5, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const WildSolver solver(g, k, par);
  const auto f = sample_spectral(InitialDatum::mixture(), par, g);
  const auto same = solver.step(f, 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(same[j], f[j]);
  EXPECT_THROW(solver.step(f, 1.0 / k.sigma()), DomainError);
  EXPECT_THROW(solver.step(f, -1.0), DomainError);

  WildConfig short_series;
  short_series.terms_per_step = 3;
  const WildSolver coarse(g, k, par, short_series);
  EXPECT_THROW(coarse.step(f, std::numbers::ln2 / k.sigma()), ToleranceError);
}

TEST(WildSolver, TailBoundMatchesFormula) {
  const ModelParams par(1.0, 1.0);
  const auto k = make_kernel(0.2);
  const WildSolver solver(XiGrid(1e-2, 4.0, 16), k, par);
  const double dt = std::numbers::ln2 / k.sigma();
  EXPECT_NEAR(solver.tail_bound(dt), std::pow(0.5, 21), 1e-18);
}

TEST(WildSolver, MatchesCollocationOracleForGaussian) {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.5);
  const auto f0 = sample_spectral(InitialDatum::gaussian(), par, g);
  const double dt = std::numbers::ln2 / k.sigma();
  const auto wild = wild_step(f0, k, par, dt);
  const auto rk = collocation_oracle(f0, k, par, dt, 40);
  EXPECT_LT(sup_diff(wild, rk), 1e-5);
}

TEST(WildSolver, PreservesUnitBoundsAndIsDeterministicAcrossThreads) {
  const ModelParams par(0.5, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const auto f0 = sample_spectral(InitialDatum::mixture(), par, g);
  const auto a = evolve(f0, k, par, 0.2);
  WildConfig threaded;
  threaded.threads = 4;
  const auto b = evolve(f0, k, par, 0.2, threaded);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_EQ(a[j], b[j]);
    EXPECT_LE(std::abs(a[j]), 1.0);
  }
  EXPECT_EQ(a(0.0), 1.0);
}

TEST(WildSolver, EvolveThroughAgreesWithSeparateEvolves) {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid(1e-3, 16.0, 96);
  const auto k = make_kernel(0.4);
  const WildSolver solver(g, k, par);
  const auto f0 = sample_spectral(InitialDatum::mixture(), par, g);
  const std::vector<double> times = {0.1, 0.25};
  const auto snaps = solver.evolve_through(f0, times);
  const auto direct = solver.evolve(solver.evolve(f0, 0.1), 0.15);
  EXPECT_LT(sup_diff(snaps[1], direct), 1e-14);
  EXPECT_THROW(solver.evolve_through(f0, std::vector<double>{0.2, 0.1}), DomainError);
}

TEST(WildSolver, EquilibriumIsStationary) {
  const auto g = XiGrid::standard();
  for (double p : {0.5, 1.0}) {
    const ModelParams par(p, 1.0);
    const auto m = sample_spectral(InitialDatum::equilibrium(), par, g);
    const auto f = evolve(m, make_kernel(0.4), par, 0.5);
    EXPECT_LT(fourier_metric(f, m, par.q()), 1e-5) << "p=" << p;
  }
}

TEST(WildSolver, GaussianEnergyDecaysAtLossRate) {
  const ModelParams par(1.0, 1.0);
  const auto g = XiGrid::standard();
  const auto k = make_kernel(0.4);
  const auto f0 = sample_spectral(InitialDatum::gaussian(), par, g);
  const double t = 0.3;
  const auto f = evolve(f0, k, par, t);
  const double expected = std::exp(-energy_loss_rate(k, par) * t);
  EXPECT_NEAR(energy_and_moments(f, 2.0), expected, 1e-3 * expected);
}
