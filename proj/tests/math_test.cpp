#include "ucover/math.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "oracles.hpp"

namespace ucover {
namespace {

TEST(WrapAngle, CanonicalValues) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);       // upper end closed
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);      // lower end maps up
  EXPECT_NEAR(wrap_angle(1.5 * kPi), -0.5 * kPi, 1e-15);
  EXPECT_NEAR(wrap_angle(2.0 * kPi), 0.0, 1e-15);
  EXPECT_NEAR(wrap_angle(-2.5 * kPi), -0.5 * kPi, 1e-12);
}

TEST(WrapAngle, RangeAndPeriodicity) {
  oracle::TestRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::sin(w), std::sin(a), 1e-9);
    EXPECT_NEAR(std::cos(w), std::cos(a), 1e-9);
    EXPECT_NEAR(wrap_angle(a + 2.0 * kPi), w, 1e-9);
  }
}

TEST(ErfInv, MatchesBisectionOracle) {
  for (double x = -0.999; x < 0.9995; x += 0.0137) {
    EXPECT_NEAR(erf_inv(x), oracle::erf_inv(x), 1e-12) << "x=" << x;
  }
}

TEST(ErfInv, RoundTripThroughErf) {
  oracle::TestRng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform(-1.0 + 1e-9, 1.0 - 1e-9);
    EXPECT_NEAR(std::erf(erf_inv(x)), x, 1e-13) << "x=" << x;
  }
}

TEST(ErfInv, KnownValues) {
  EXPECT_DOUBLE_EQ(erf_inv(0.0), 0.0);
  EXPECT_NEAR(erf_inv(0.2), 0.17914345462129168, 1e-13);
  EXPECT_NEAR(erf_inv(0.4), 0.37080715859355793, 1e-13);
  EXPECT_NEAR(erf_inv(0.98), 1.6449763571331871, 1e-12);
  EXPECT_NEAR(erf_inv(-0.2), -erf_inv(0.2), 1e-15);
}

TEST(ErfInv, RejectsOutOfDomain) {
  EXPECT_THROW(erf_inv(1.0), std::domain_error);
  EXPECT_THROW(erf_inv(-1.0), std::domain_error);
  EXPECT_THROW(erf_inv(1.5), std::domain_error);
  EXPECT_THROW(erf_inv(std::nan("")), std::domain_error);
}

TEST(CholeskyPsd, FactorsKnownMatrix) {
  Eigen::MatrixXd m(2, 2);
  m << 4.0, 2.0, 2.0, 3.0;
  const Eigen::MatrixXd l = cholesky_psd(m);
  EXPECT_NEAR(l(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(l(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(l(1, 1), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(l(0, 1), 0.0, 0.0);
  EXPECT_NEAR(((l * l.transpose()) - m).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(CholeskyPsd, HandlesSemidefiniteViaJitter) {
  Eigen::MatrixXd m(3, 3);
  Eigen::VectorXd v(3);
  v << 1.0, 2.0, -1.0;
  m = v * v.transpose();  // rank 1
  const Eigen::MatrixXd l = cholesky_psd(m);
  EXPECT_LT(((l * l.transpose()) - m).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(CholeskyPsd, RejectsIndefinite) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(cholesky_psd(m), std::runtime_error);
}

TEST(SqrtPsd, SquaresBack) {
  oracle::TestRng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    }
    const Eigen::MatrixXd m = a * a.transpose();
    const Eigen::MatrixXd s = sqrt_psd(m);
    EXPECT_LT(((s * s) - m).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SqrtPsd, HandlesSingularAndRejectsNegative) {
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  EXPECT_LT(sqrt_psd(zero).cwiseAbs().maxCoeff(), 1e-12);

  Eigen::VectorXd v(3);
  v << 1.0, -1.0, 0.5;
  const Eigen::MatrixXd rank1 = v * v.transpose();
  const Eigen::MatrixXd s = sqrt_psd(rank1);
  EXPECT_LT(((s * s) - rank1).cwiseAbs().maxCoeff(), 1e-9);

  Eigen::MatrixXd neg(2, 2);
  neg << 1.0, 0.0, 0.0, -0.5;
  EXPECT_THROW(sqrt_psd(neg), std::runtime_error);
}

TEST(Splitmix64, ReferenceSequence) {
  // Vectors generated from an independent implementation of the canonical
  // SplitMix64 algorithm.
  std::uint64_t s = 42;
  EXPECT_EQ(splitmix64(s), 13679457532755275413ULL);
  EXPECT_EQ(splitmix64(s), 2949826092126892291ULL);
  EXPECT_EQ(splitmix64(s), 5139283748462763858ULL);
  EXPECT_EQ(splitmix64(s), 6349198060258255764ULL);
  s = 0;
  EXPECT_EQ(splitmix64(s), 16294208416658607535ULL);
  EXPECT_EQ(splitmix64(s), 7960286522194355700ULL);
  EXPECT_EQ(splitmix64(s), 487617019471545679ULL);
}

TEST(DeriveSeed, ReferenceValuesAndDistinctness) {
  EXPECT_EQ(derive_seed(1, 0), 15398788102373112401ULL);
  EXPECT_EQ(derive_seed(1, 1), 5653751148059074118ULL);
  EXPECT_EQ(derive_seed(7, 3), 12817291526077444027ULL);

  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 1; base <= 5; ++base) {
    for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(base, i));
  }
  EXPECT_EQ(seen.size(), 250u);
}

TEST(NormalSampler, DeterministicAndSeedSensitive) {
  NormalSampler a(123), b(123), c(124);
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a();
    EXPECT_EQ(va, b());
    if (va != c()) any_diff = true;
  }
  EXPECT_TRUE(any_diff);
}

TEST(NormalSampler, Uniform01Range) {
  NormalSampler s(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(NormalSampler, MomentsAndDistribution) {
  const int n = 100000;
  NormalSampler s(2024);
  std::vector<double> draws(n);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    draws[static_cast<std::size_t>(i)] = s();
    mean += draws[static_cast<std::size_t>(i)];
  }
  mean /= n;
  double var = 0.0, skew = 0.0;
  for (double d : draws) {
    var += (d - mean) * (d - mean);
    skew += (d - mean) * (d - mean) * (d - mean);
  }
  var /= n - 1;
  skew /= n * std::pow(var, 1.5);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
  EXPECT_NEAR(skew, 0.0, 0.05);

  // Kolmogorov-Smirnov distance against the normal CDF oracle; the 0.1%
  // critical value at this n is ~0.0062, and the seed is fixed.
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = oracle::normal_cdf(draws[static_cast<std::size_t>(i)]);
    ks = std::max(ks, std::abs(f - (i + 1.0) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
  }
  EXPECT_LT(ks, 0.0062);
}

TEST(Chi3Quantile, MatchesOracle) {
  EXPECT_NEAR(kChi3Quantile999, oracle::chi3_quantile(0.999), 1e-9);
  EXPECT_NEAR(oracle::chi3_cdf(kChi3Quantile999), 0.999, 1e-12);
}

}  // namespace
}  // namespace ucover
