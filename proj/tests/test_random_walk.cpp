#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

#include "rigidlab/errors.hpp"
#include "rigidlab/random_walk.hpp"

using namespace rigidlab;
using namespace rigidlab::walk;
using dynamics::IntMat;
using dynamics::Space;
using dynamics::SpaceKind;
using dynamics::SystemSpec;

namespace {

const Space kInterval{SpaceKind::Interval, 1};
const Space kCircle{SpaceKind::Circle, 1};

WalkMeasure cantor() {
  return WalkMeasure::uniform({SystemSpec::affine(Rational(1, 3), Rational(0)),
                               SystemSpec::affine(Rational(1, 3), Rational(2, 3))});
}

WalkMeasure identity_walk() { return WalkMeasure::dirac(SystemSpec::rotation(0.0)); }

EmpiricalMeasure atoms(Space s, std::vector<double> pts, std::vector<double> w) {
  EmpiricalMeasure m;
  m.space = s;
  m.points = std::move(pts);
  m.weights = std::move(w);
  return m;
}

}  // namespace

TEST(Empirical, SingleStepIsDirac) {
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.4}, 1, 5, 3);
  for (std::size_t i = 0; i < nu.size(); ++i) EXPECT_EQ(nu.points[i], 0.4);
  EXPECT_NEAR(nu.total_weight(), 1.0, 1e-15);
}

TEST(Empirical, CantorAvoidsMiddleThird) {
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.0}, 2000, 8, 1);
  for (double x : nu.points) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
    EXPECT_FALSE(x > 1.0 / 3.0 + 1e-12 && x < 2.0 / 3.0 - 1e-12) << x;
  }
}

TEST(Empirical, BurnInAndWeights) {
  SimulationOptions opt;
  opt.burn_in = 10;
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.0}, 50, 4, 2, opt);
  EXPECT_EQ(nu.size(), 160u);
  EXPECT_DOUBLE_EQ(nu.weights[0], 1.0 / 160.0);
  EXPECT_NEAR(nu.total_weight(), 1.0, 1e-14);
}

TEST(Empirical, DeterministicAcrossThreadCounts) {
  setenv("RIGIDLAB_THREADS", "1", 1);
  const auto a = empirical_measure(cantor(), std::vector<double>{0.0}, 500, 16, 9);
  setenv("RIGIDLAB_THREADS", "6", 1);
  const auto b = empirical_measure(cantor(), std::vector<double>{0.0}, 500, 16, 9);
  unsetenv("RIGIDLAB_THREADS");
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.weights, b.weights);
  const auto c = empirical_measure(cantor(), std::vector<double>{0.0}, 500, 16, 10);
  EXPECT_NE(a.points, c.points);
}

TEST(Convolve, IdentityLeavesMeasureUnchanged) {
  const auto nu = atoms(kCircle, {0.1, 0.7}, {0.25, 0.75});
  const auto out = convolve_push(identity_walk(), nu, ConvolveMode::Exact);
  EXPECT_EQ(out.points, nu.points);
  EXPECT_EQ(out.weights, nu.weights);
}

TEST(Convolve, CantorImageOfZero) {
  const auto out = convolve_push(cantor(), EmpiricalMeasure::dirac(kInterval, std::vector<double>{0.0}),
                                 ConvolveMode::Exact);
  ASSERT_EQ(out.size(), 2u);
  std::vector<double> pts = out.points;
  std::sort(pts.begin(), pts.end());
  EXPECT_EQ(pts[0], 0.0);
  EXPECT_DOUBLE_EQ(pts[1], 2.0 / 3.0);
  EXPECT_EQ(out.weights[0], 0.5);
  EXPECT_EQ(out.weights[1], 0.5);
}

TEST(Convolve, SampledAndBudget) {
  const auto nu = EmpiricalMeasure::lebesgue_grid(kInterval, 100);
  const auto s = convolve_push(cantor(), nu, ConvolveMode::Sampled, 3);
  EXPECT_EQ(s.size(), 100u);
  EXPECT_NEAR(s.total_weight(), 1.0, 1e-14);
  EXPECT_THROW(convolve_push(cantor(), nu, ConvolveMode::Exact, 1, 150), BudgetExceeded);
}

TEST(KS, HandComputedDistances) {
  const auto a = atoms(kInterval, {0.2, 0.6}, {0.5, 0.5});
  const auto b = atoms(kInterval, {0.4}, {1.0});
  EXPECT_DOUBLE_EQ(ks_distance(a, b), 0.5);
  const auto c = atoms(kInterval, {0.2, 0.6}, {0.25, 0.75});
  EXPECT_DOUBLE_EQ(ks_distance(a, c), 0.25);
  EXPECT_EQ(ks_distance(a, a), 0.0);
}

TEST(Stationarity, IdentityIsExactlyZero) {
  const auto nu = atoms(kCircle, {0.1, 0.3, 0.9}, {0.2, 0.3, 0.5});
  EXPECT_EQ(stationarity_residual(identity_walk(), nu), 0.0);
}

TEST(Stationarity, DiracAtNonFixedPoint) {
  // Images 1/6 and 5/6 each carry half the mass; the CDF gap at 1/2 is 1/2.
  const auto nu = EmpiricalMeasure::dirac(kInterval, std::vector<double>{0.5});
  EXPECT_DOUBLE_EQ(stationarity_residual(cantor(), nu), 0.5);
}

TEST(Invariance, RotationPreservesLebesgue) {
  const auto mu = WalkMeasure::uniform({SystemSpec::rotation(0.3819660112501051), SystemSpec::rotation(0.1)});
  const auto nu = EmpiricalMeasure::lebesgue_grid(kCircle, 1000);
  for (double r : invariance_residual(mu, nu)) EXPECT_LE(r, 1.0 / 1000 + 1e-12);
}

TEST(Invariance, CantorContractionAtBreakpoint) {
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.0}, 20000, 8, 5);
  const auto inv = invariance_residual(cantor(), nu);
  EXPECT_NEAR(inv[0], 0.5, 0.02);
  EXPECT_NEAR(inv[1], 0.5, 0.02);
}

TEST(Invariance, SingleAtomEqualsStationarity) {
  const auto mu = WalkMeasure::dirac(SystemSpec::rotation(0.25));
  const auto nu = empirical_measure(mu, std::vector<double>{0.1}, 37, 1, 1);
  EXPECT_EQ(invariance_residual(mu, nu).at(0), stationarity_residual(mu, nu));
  const auto rep = residual_report(mu, nu);
  EXPECT_EQ(rep.metric, Metric::KolmogorovSmirnov);
  EXPECT_EQ(rep.sample_size, 37u);
}

TEST(Weyl, Frequencies) {
  EXPECT_EQ(weyl_frequencies(1, 3), (std::vector<std::vector<int>>{{1}, {2}, {3}}));
  const auto f2 = weyl_frequencies(2, 1);
  EXPECT_EQ(f2.size(), 4u);
  for (const auto& k : f2) {
    const int lead = k[0] != 0 ? k[0] : k[1];
    EXPECT_GT(lead, 0);
  }
  EXPECT_EQ(weyl_frequencies(3, 2).size(), (125u - 1) / 2);
}

TEST(Weyl, LebesgueGridCancels) {
  const auto nu = EmpiricalMeasure::lebesgue_grid(kCircle, 1000);
  for (double c : weyl_coefficients(nu, 999)) EXPECT_LE(c, 1e-12);
  const auto t = EmpiricalMeasure::lebesgue_grid(Space{SpaceKind::Torus, 2}, 32);
  for (double c : weyl_coefficients(t, 5)) EXPECT_LE(c, 1e-12);
}

TEST(Weyl, DiracHasUnitCoefficients) {
  const auto d = EmpiricalMeasure::dirac(Space{SpaceKind::Torus, 2}, std::vector<double>{0.3, 0.8});
  for (double c : weyl_coefficients(d, 3)) EXPECT_NEAR(c, 1.0, 1e-14);
}

TEST(Weyl, MatchesDirectSum) {
  const auto nu = atoms(Space{SpaceKind::Torus, 2}, {0.1, 0.2, 0.7, 0.4, 0.35, 0.9}, {0.5, 0.3, 0.2});
  const auto freqs = weyl_frequencies(2, 2);
  const auto c = fourier_coefficients(nu, 2);
  ASSERT_EQ(c.size(), freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    std::complex<double> direct = 0;
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double phase = 2 * std::numbers::pi * (freqs[i][0] * nu.points[2 * j] + freqs[i][1] * nu.points[2 * j + 1]);
      direct += nu.weights[j] * std::polar(1.0, phase);
    }
    EXPECT_NEAR(std::abs(c[i] - direct), 0.0, 1e-13);
  }
}

TEST(Weyl, TorusResidualsUseFourierMetric) {
  IntMat a(2, 2);
  a << 2, 1, 1, 1;
  const auto mu = WalkMeasure::dirac(SystemSpec::toral(a));
  const auto nu = EmpiricalMeasure::lebesgue_grid(Space{SpaceKind::Torus, 2}, 16);
  EXPECT_EQ(metric_for(nu.space), Metric::WeylFourier);
  EXPECT_LE(stationarity_residual(mu, nu, 4), 1e-12);
}

TEST(BoxDimension, Examples) {
  const std::vector<double> scales = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  const auto single = EmpiricalMeasure::dirac(kInterval, std::vector<double>{0.37});
  EXPECT_EQ(box_dimension(single, scales).slope, 0.0);
  const auto leb = EmpiricalMeasure::lebesgue_grid(kInterval, 4096);
  EXPECT_NEAR(box_dimension(leb, scales).slope, 1.0, 0.05);
  EXPECT_THROW(box_dimension(leb, std::vector<double>{0.1, 0.01}), DegenerateFit);
  EXPECT_THROW(box_dimension(EmpiricalMeasure{kInterval, {}, {}}, scales), DegenerateFit);
}

TEST(BoxDimension, CantorCountsMatchExactCantorSet) {
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.0}, 20000, 16, 3);
  const std::vector<double> scales = {1.0 / 9, 1.0 / 27, 1.0 / 81, 1.0 / 243};
  const auto dim = box_dimension(nu, scales);
  // The Cantor set meets exactly 2^k triadic intervals of length 3^-k.
  EXPECT_EQ(dim.counts, (std::vector<std::size_t>{4, 8, 16, 32}));
  EXPECT_NEAR(dim.slope, std::log(2.0) / std::log(3.0), 1e-12);
}

TEST(RelativeEntropy, DisjointImagesCarryNoUncertainty) {
  const auto nu = empirical_measure(cantor(), std::vector<double>{0.0}, 5000, 4, 1);
  const auto est = relative_entropy_estimate(cantor(), nu, 9);
  EXPECT_NEAR(est.h_rel, 0.0, 1e-12);
  EXPECT_NEAR(est.H_mu, std::log(2.0), 1e-15);
  EXPECT_NEAR(est.gap, std::log(2.0), 1e-12);
}

TEST(RelativeEntropy, InvariantMeasureSaturatesBound) {
  const auto mu = WalkMeasure::uniform({SystemSpec::rotation(0.25), SystemSpec::rotation(0.5)});
  const auto nu = EmpiricalMeasure::lebesgue_grid(kCircle, 64);
  const auto est = relative_entropy_estimate(mu, nu, 8);
  EXPECT_NEAR(est.h_rel, std::log(2.0), 1e-12);
  EXPECT_NEAR(est.gap, 0.0, 1e-12);
}

TEST(Mix, ConcatenatesWithWeights) {
  const auto a = atoms(kInterval, {0.1}, {1.0});
  const auto b = atoms(kInterval, {0.9}, {1.0});
  const auto m = mix(a, 0.25, b, 0.75);
  EXPECT_EQ(m.points, (std::vector<double>{0.1, 0.9}));
  EXPECT_EQ(m.weights, (std::vector<double>{0.25, 0.75}));
}
