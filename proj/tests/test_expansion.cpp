#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rigidlab/errors.hpp"
#include "rigidlab/expansion.hpp"

using namespace rigidlab;
using namespace rigidlab::expansion;
using dynamics::IntMat;
using dynamics::SystemSpec;
using walk::WalkMeasure;

namespace {

IntMat int2(long long a, long long b, long long c, long long d) {
  IntMat m(2, 2);
  m << a, b, c, d;
  return m;
}

const IntMat kA = int2(2, 1, 1, 1);
const IntMat kB = int2(1, 1, 1, 2);
const double kLambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);

double log_volume(const Mat& v) {
  const Eigen::ColPivHouseholderQR<Mat> qr(v);
  double acc = 0;
  for (long i = 0; i < v.cols(); ++i) acc += std::log(std::abs(qr.matrixQR()(i, i)));
  return acc;
}

// Enumerates all words directly: sum_w p(w) log |Lambda^d(J_w) V| / |V|.
double brute_sigma(const std::vector<Mat>& gens, std::size_t N, const Mat& frame) {
  const std::size_t k = gens.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < N; ++i) total *= k;
  const double p = 1.0 / static_cast<double>(total);
  const double base = log_volume(frame);
  double acc = 0;
  for (std::size_t w = 0; w < total; ++w) {
    Mat m = Mat::Identity(frame.rows(), frame.rows());
    std::size_t rest = w;
    for (std::size_t i = 0; i < N; ++i) {
      m = gens[rest % k] * m;
      rest /= k;
    }
    acc += p * (log_volume(m * frame) - base);
  }
  return acc;
}

}  // namespace

TEST(PlaneSpec, OrthonormalizesAndValidates) {
  Mat v(3, 2);
  v << 1, 1, 0, 1, 0, 0;
  const auto p = PlaneSpec::from_vectors({}, v);
  EXPECT_TRUE((p.basis.transpose() * p.basis).isApprox(Mat::Identity(2, 2), 1e-14));
  EXPECT_NEAR(p.plucker.norm(), 1.0, 1e-14);
  Mat dep(2, 2);
  dep << 1, 2, 2, 4;
  EXPECT_THROW(PlaneSpec::from_vectors({}, dep), InvalidArgument);
  EXPECT_THROW(PlaneSpec::from_vectors({}, Mat(2, 3)), InvalidArgument);
}

TEST(Plucker, MinorsOfTwoPlane) {
  Mat v(3, 2);
  v << 1, 0, 0, 1, 2, 3;
  const Vec p = plucker_vector(v);
  ASSERT_EQ(p.size(), 3);
  EXPECT_DOUBLE_EQ(p(0), 1.0);   // rows {0,1}
  EXPECT_DOUBLE_EQ(p(1), 3.0);   // rows {0,2}
  EXPECT_DOUBLE_EQ(p(2), -2.0);  // rows {1,2}
}

TEST(LogExpansion, ScaleInvariant) {
  const Mat j = kA.cast<double>();
  Mat v(2, 1);
  v << 0.3, -0.7;
  EXPECT_NEAR(log_expansion(j, v), log_expansion(j, 5.0 * v), 1e-14);
  EXPECT_NEAR(log_expansion(j, Mat::Identity(2, 2)), 0.0, 1e-14);
}

TEST(Sigma, IdentityIsZero) {
  const auto mu = WalkMeasure::dirac(SystemSpec::toral(int2(1, 0, 0, 1)));
  for (std::size_t N : {1, 4})
    EXPECT_EQ(sigma(mu, N, PlaneSpec::from_angle({0.0, 0.0}, 0.4)).value, 0.0);
}

TEST(Sigma, DiracAlongTopEigenvector) {
  const auto mu = WalkMeasure::dirac(SystemSpec::toral(kA));
  const double lu = (3.0 + std::sqrt(5.0)) / 2.0;
  Mat v(2, 1);
  v << 1.0, lu - 2.0;
  for (std::size_t N : {1, 5, 10}) {
    const auto s = sigma(mu, N, PlaneSpec::from_vectors({0.0, 0.0}, v));
    EXPECT_NEAR(s.value, static_cast<double>(N) * kLambda, 1e-11);
  }
}

TEST(Sigma, ExactMatchesEnumeration) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kB)});
  const std::vector<Mat> gens = {kA.cast<double>(), kB.cast<double>()};
  for (double theta : {0.0, 0.7, 2.1}) {
    const auto plane = PlaneSpec::from_angle({0.0, 0.0}, theta);
    const auto s = sigma(mu, 6, plane);
    EXPECT_NEAR(s.value, brute_sigma(gens, 6, plane.basis), 1e-12);
    EXPECT_EQ(s.count, 64u);
    EXPECT_NEAR(s.weight_total, 1.0, 1e-12);
  }
}

TEST(Sigma, MonteCarloWithinErrorBars) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kA).inverse()});
  const auto plane = PlaneSpec::from_angle({0.0, 0.0}, 0.3);
  const double exact = sigma(mu, 8, plane).value;
  SigmaOptions opt;
  opt.mode = Mode::MonteCarlo;
  opt.samples = 20000;
  opt.seed = 4;
  const auto mc = sigma(mu, 8, plane, opt);
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_LT(std::abs(mc.value - exact), 4 * mc.std_error);
  EXPECT_EQ(sigma(mu, 8, plane, opt).value, mc.value);
}

TEST(Sigma, HigherDimensionalPlane) {
  IntMat m(3, 3);
  m << 2, 1, 0, 1, 1, 0, 0, 0, 1;
  const auto mu = WalkMeasure::dirac(SystemSpec::toral(m));
  const auto full = PlaneSpec::from_vectors({0.0, 0.0, 0.0}, Mat::Identity(3, 3));
  EXPECT_NEAR(sigma(mu, 3, full).value, 0.0, 1e-12);
  Mat v(3, 2);
  v << 1, 0, 0, 1, 0, 0;
  EXPECT_NEAR(sigma(mu, 3, PlaneSpec::from_vectors({0.0, 0.0, 0.0}, v)).value, 0.0, 1e-12);
  Mat w(3, 2);
  w << 1, 0, 0, 0, 0, 1;
  EXPECT_NEAR(sigma(mu, 2, PlaneSpec::from_vectors({0.0, 0.0, 0.0}, w)).value,
              brute_sigma({m.cast<double>()}, 2, w), 1e-12);
}

TEST(Sigma, BudgetAndArguments) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kB)});
  SigmaOptions opt;
  opt.word_budget = 100;
  EXPECT_THROW(sigma(mu, 8, PlaneSpec::from_angle({0.0, 0.0}, 0.1), opt), BudgetExceeded);
  EXPECT_THROW(sigma(mu, 0, PlaneSpec::from_angle({0.0, 0.0}, 0.1)), InvalidArgument);
}

TEST(Grid, AngularSpacing) {
  const auto g = angular_grid({}, 8);
  ASSERT_EQ(g.bases.size(), 8u);
  EXPECT_NEAR(g.angular_spacing, std::numbers::pi / 8, 1e-15);
  EXPECT_NEAR(g.bases[2](0, 0), std::cos(std::numbers::pi / 4), 1e-15);
  const auto f = angular_flag_grid({}, 4);
  EXPECT_EQ(f.bases[1].cols(), 2);
  EXPECT_NEAR(f.bases[1].col(0).dot(f.bases[1].col(1)), 0.0, 1e-15);
  const auto r = random_grid({}, 4, 2, 5, 9);
  for (const auto& b : r.bases) EXPECT_TRUE((b.transpose() * b).isApprox(Mat::Identity(2, 2), 1e-12));
}

TEST(Scan, IdentityGivesNoCertificate) {
  const auto mu = WalkMeasure::dirac(SystemSpec::toral(int2(1, 0, 0, 1)));
  const auto rep = uniform_expansion_scan(mu, 4, 1, angular_grid({}, 12));
  EXPECT_EQ(rep.min_value, 0.0);
  EXPECT_FALSE(rep.certificate);
  const auto gaps = uniform_gaps_scan(mu, 4, 1, 1, angular_flag_grid({}, 12));
  EXPECT_EQ(gaps.min_value, 0.0);
  EXPECT_FALSE(gaps.certificate);
}

TEST(Scan, RotationPairIsIsometric) {
  auto rot = [](double t) {
    Mat m(2, 2);
    m << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return SystemSpec::linear(m);
  };
  const auto mu = WalkMeasure::uniform({rot(0.5), rot(1.3)});
  const auto rep = uniform_expansion_scan(mu, 6, 1, angular_grid({}, 36));
  EXPECT_NEAR(rep.min_value, 0.0, 1e-12);
  EXPECT_FALSE(rep.certificate);
}

TEST(Scan, ExpandingPairCertifies) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kB)});
  const auto grid = angular_grid({}, 360);
  const auto rep = uniform_expansion_scan(mu, 8, 1, grid);
  const std::vector<Mat> gens = {kA.cast<double>(), kB.cast<double>()};
  double oracle_min = 1e300;
  for (const auto& b : grid.bases) oracle_min = std::min(oracle_min, brute_sigma(gens, 8, b));
  EXPECT_GT(rep.min_value, 0.0);
  EXPECT_NEAR(rep.min_value, oracle_min, 1e-12);
  EXPECT_TRUE(rep.certificate);
  EXPECT_EQ(rep.rows.size(), 360u);
  EXPECT_EQ(rep.rows[rep.argmin].sigma, rep.min_value);

  ScanOptions high;
  high.margin = rep.min_value + 1.0;
  EXPECT_FALSE(uniform_expansion_scan(mu, 8, 1, grid, high).certificate);
}

TEST(Scan, GapsMatchDifferenceOfSigmas) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kB)});
  const auto grid = angular_flag_grid({}, 10);
  const auto rep = uniform_gaps_scan(mu, 4, 1, 1, grid);
  const std::vector<Mat> gens = {kA.cast<double>(), kB.cast<double>()};
  for (std::size_t i = 0; i < grid.bases.size(); ++i) {
    const Mat p0 = grid.bases[i].leftCols(1);
    const double expected = brute_sigma(gens, 4, grid.bases[i]) - brute_sigma(gens, 4, p0);
    EXPECT_NEAR(rep.rows[i].sigma, expected, 1e-12);
  }
  const auto neg = uniform_gaps_scan(mu, 4, 1, -1, grid);
  EXPECT_NEAR(neg.rows[3].sigma, -rep.rows[3].sigma, 1e-15);
  EXPECT_THROW(uniform_gaps_scan(mu, 4, 1, 1, angular_grid({}, 4)), InvalidArgument);
}

TEST(Lipschitz, BoundsAngularDerivative) {
  const auto mu = WalkMeasure::uniform({SystemSpec::toral(kA), SystemSpec::toral(kB)});
  const double L = angular_lipschitz_bound(mu, 4);
  const double h = 1e-5;
  for (double t : {0.1, 1.0, 2.5}) {
    const double d = (sigma(mu, 4, PlaneSpec::from_angle({0.0, 0.0}, t + h)).value -
                      sigma(mu, 4, PlaneSpec::from_angle({0.0, 0.0}, t - h)).value) /
                     (2 * h);
    EXPECT_LE(std::abs(d), L);
  }
}
