#include "ucover/uncertainty.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

namespace ucover {
namespace {

DisturbanceModel paper_noise() {
  DisturbanceModel d;
  d.q_diag = Eigen::Vector3d::Constant(1e-3);
  return d;
}

GaussianBelief paper_start() {
  GaussianBelief b;
  b.mean << 10, 10, 10, 0, 0;
  b.covariance = 1e-4 * Matrix5d::Identity();
  return b;
}

TEST(UtConfig, LambdaAndValidation) {
  const UtConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.lambda(8), 2.5);
  EXPECT_NO_THROW(cfg.validate());

  UtConfig bad = cfg;
  bad.dim = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad.dim = 8;
  bad.alpha = 0.0;
  bad.rho = -10.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Augment, BlockDiagonalStacking) {
  const auto [mean, cov] = augment(paper_start(), paper_noise());
  ASSERT_EQ(mean.size(), 8);
  EXPECT_DOUBLE_EQ(mean[0], 10.0);
  EXPECT_DOUBLE_EQ(mean[4], 0.0);
  EXPECT_DOUBLE_EQ(mean[5], 0.0);
  EXPECT_DOUBLE_EQ(mean[7], 0.0);

  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  expected.topLeftCorner<5, 5>() = 1e-4 * Matrix5d::Identity();
  expected.bottomRightCorner<3, 3>() = 1e-3 * Eigen::Matrix3d::Identity();
  EXPECT_TRUE(cov.isApprox(expected));
  EXPECT_TRUE((cov.topRightCorner<5, 3>().isZero()));
}

TEST(SigmaPoints, WeightsMatchScaling) {
  const UtConfig cfg;
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(8, 8);
  const SigmaSet s = sigma_points(mean, cov, cfg);

  ASSERT_EQ(s.points.cols(), 17);
  EXPECT_NEAR(s.mean_weights[0], 2.5 / 10.5, 1e-15);
  EXPECT_NEAR(s.cov_weights[0], 2.5 / 10.5 + 2.0, 1e-15);
  for (int i = 1; i < 17; ++i) {
    EXPECT_NEAR(s.mean_weights[i], 1.0 / 21.0, 1e-15);
    EXPECT_NEAR(s.cov_weights[i], 1.0 / 21.0, 1e-15);
  }
  EXPECT_NEAR(s.mean_weights.sum(), 1.0, 1e-12);

  // Identity covariance: offsets are sqrt(d + lambda) e_i.
  const double r = std::sqrt(10.5);
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(s.points(i, 1 + i), r, 1e-12);
    EXPECT_NEAR(s.points(i, 9 + i), -r, 1e-12);
  }
}

TEST(SigmaPoints, AntipodalAndMeanRecovery) {
  const UtConfig cfg;
  oracle::TestRng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd mean(4);
    for (int i = 0; i < 4; ++i) mean[i] = rng.uniform(-5, 5);
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = rng.uniform(-1, 1);
    Eigen::MatrixXd cov = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4);

    const SigmaSet s = sigma_points(mean, cov, cfg);
    ASSERT_EQ(s.points.cols(), 9);
    EXPECT_TRUE(s.points.col(0).isApprox(mean));
    for (int i = 0; i < 4; ++i) {
      EXPECT_TRUE((s.points.col(1 + i) + s.points.col(5 + i)).isApprox(2 * mean, 1e-9));
    }
    const Eigen::VectorXd recovered = s.points * s.mean_weights;
    EXPECT_TRUE(recovered.isApprox(mean, 1e-10));

    // Weighted scatter reproduces the input covariance.
    Eigen::MatrixXd centered = s.points.colwise() - mean;
    Eigen::MatrixXd scatter = centered * s.cov_weights.asDiagonal() * centered.transpose();
    EXPECT_LT((scatter - cov).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SigmaPoints, DimensionMismatchThrows) {
  const UtConfig cfg;
  EXPECT_THROW(
      sigma_points(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(4, 4), cfg),
      std::invalid_argument);
}

TEST(UtTransform, ExactOnAffineMaps) {
  const UtConfig cfg;
  oracle::TestRng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + (trial % 5);  // input dims 2..6
    const int m = 1 + (trial % 4);  // output dims 1..4
    Eigen::VectorXd mean(n);
    for (int i = 0; i < n; ++i) mean[i] = rng.uniform(-10, 10);
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n * n; ++i) g(i / n, i % n) = rng.uniform(-1, 1);
    Eigen::MatrixXd cov = g * g.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd a(m, n);
    for (int i = 0; i < m * n; ++i) a(i / n, i % n) = rng.uniform(-2, 2);
    Eigen::VectorXd c(m);
    for (int i = 0; i < m; ++i) c[i] = rng.uniform(-3, 3);

    const auto [out_mean, out_cov] =
        ut_transform(mean, cov, cfg, [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
          return a * x + c;
        });

    const Eigen::VectorXd want_mean = a * mean + c;
    const Eigen::MatrixXd want_cov = a * cov * a.transpose();
    EXPECT_LT((out_mean - want_mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((out_cov - want_cov).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Propagate, HoverKeepsPositionMean) {
  // Near-zero covariance and level attitude: position mean must stay put to
  // within the sigma-point spread.
  GaussianBelief b;
  b.mean << 5, 6, 7, 0, 0;
  b.covariance = 1e-12 * Matrix5d::Identity();
  DisturbanceModel d;
  d.q_diag = Eigen::Vector3d::Constant(1e-12);
  const GaussianBelief out = propagate(b, d, {12.0, 0.0, 0.0}, 0.1, UtConfig{});
  EXPECT_NEAR(out.mean[0], 5.0, 1e-6);
  EXPECT_NEAR(out.mean[1], 6.0, 1e-6);
  EXPECT_NEAR(out.mean[2], 7.0, 1e-6);
}

TEST(Propagate, AngleChannelsAreLinearGaussian) {
  // theta and phi evolve affinely, so the UT result must match the exact
  // linear-Gaussian update on those channels.
  GaussianBelief b = paper_start();
  const DisturbanceModel d = paper_noise();
  const ControlInput u{0.0, 0.5, -0.8};
  const double dt = 0.1;
  const GaussianBelief out = propagate(b, d, u, dt, UtConfig{});

  EXPECT_NEAR(out.mean[3], 0.05, 1e-10);
  EXPECT_NEAR(out.mean[4], -0.08, 1e-10);
  // var += dt^2 * q
  EXPECT_NEAR(out.covariance(3, 3), 1e-4 + dt * dt * 1e-3, 1e-10);
  EXPECT_NEAR(out.covariance(4, 4), 1e-4 + dt * dt * 1e-3, 1e-10);
  EXPECT_NEAR(out.covariance(3, 4), 0.0, 1e-10);
  out.validate();
}

TEST(Propagate, MatchesMonteCarloMoments) {
  GaussianBelief b;
  b.mean << 10, 10, 10, 0.3, 0.6;
  b.covariance = 1e-2 * Matrix5d::Identity();
  DisturbanceModel d;
  d.q_diag = Eigen::Vector3d(1e-2, 1e-3, 1e-3);
  const ControlInput u{8.0, 0.2, -0.1};
  const double dt = 0.1;
  const GaussianBelief ut = propagate(b, d, u, dt, UtConfig{});

  std::mt19937_64 gen(12345);
  std::normal_distribution<double> n01;
  const int samples = 100000;
  std::vector<Eigen::VectorXd> outs;
  outs.reserve(samples);
  const Matrix5d l = b.covariance.llt().matrixL();
  for (int i = 0; i < samples; ++i) {
    Vector5d z;
    for (int k = 0; k < 5; ++k) z[k] = n01(gen);
    const Vector5d x = b.mean + l * z;
    Eigen::Vector3d nu;
    for (int k = 0; k < 3; ++k) nu[k] = std::sqrt(d.q_diag[k]) * n01(gen);
    outs.push_back(step_raw(AgentState::from_vector(x), u, nu, dt).to_vector());
  }
  const Eigen::VectorXd mc_mean = oracle::sample_mean(outs);
  const Eigen::MatrixXd mc_cov = oracle::sample_cov(outs);

  // Mean within 3 standard errors per channel; covariance within 10%.
  for (int k = 0; k < 5; ++k) {
    const double se = std::sqrt(mc_cov(k, k) / samples);
    EXPECT_NEAR(ut.mean[k], mc_mean[k], 3.5 * se) << "channel " << k;
  }
  const double scale = mc_cov.cwiseAbs().maxCoeff();
  EXPECT_LT((ut.covariance - mc_cov).cwiseAbs().maxCoeff(), 0.10 * scale);
}

TEST(Propagate, RejectsBadDt) {
  EXPECT_THROW(propagate(paper_start(), paper_noise(), {1, 0, 0}, 0.0, UtConfig{}),
               std::invalid_argument);
}

TEST(ChanceMargin, KnownQuantileValues) {
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d a(1, 0, 0);
  // a^T P a = 1: zeta = sqrt(2) erfinv(1 - 2 delta).
  EXPECT_NEAR(chance_margin(a, eye, 0.4), 0.25334710313579980, 1e-13);
  EXPECT_NEAR(chance_margin(a, eye, 0.3), 0.52440051270804078, 1e-13);
  EXPECT_DOUBLE_EQ(chance_margin(a, eye, 0.5), 0.0);
  EXPECT_LT(chance_margin(a, eye, 0.7), 0.0);
}

TEST(ChanceMargin, MatchesNormalQuantileOracle) {
  // The tightened constraint a.p <= b - zeta must put exactly 1 - delta of the
  // Gaussian mass below b when the mean sits on the tightened boundary, i.e.
  // zeta equals the (1 - delta) quantile of N(0, a^T P a).
  const Eigen::Vector3d a = Eigen::Vector3d(0.3, -1.2, 0.8).normalized();
  Eigen::Matrix3d p;
  p << 2.0, 0.3, -0.1, 0.3, 1.5, 0.2, -0.1, 0.2, 0.9;
  const double sigma = std::sqrt(a.dot(p * a));
  for (double delta : {0.01, 0.1, 0.3, 0.4, 0.5}) {
    const double zeta = chance_margin(a, p, delta);
    const double want = sigma * oracle::normal_quantile(1.0 - delta);
    EXPECT_NEAR(zeta, want, 1e-10) << "delta " << delta;
    // Direct CDF check: P(N(0, sigma^2) > zeta) == delta.
    EXPECT_NEAR(1.0 - oracle::normal_cdf(zeta / sigma), delta, 1e-12);
  }
}

TEST(ChanceMargin, ScalesWithDirectionalStdev) {
  oracle::TestRng rng(5);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector3d a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (a.norm() < 1e-3) continue;
    Eigen::Matrix3d g;
    for (int k = 0; k < 9; ++k) g(k / 3, k % 3) = rng.uniform(-1, 1);
    const Eigen::Matrix3d p = g * g.transpose();
    const double delta = rng.uniform(0.01, 0.49);
    const double zeta = chance_margin(a, p, delta);
    const double s = rng.uniform(0.5, 3.0);
    // Scaling a scales zeta linearly; scaling P scales it by sqrt.
    EXPECT_NEAR(chance_margin(s * a, p, delta), s * zeta, 1e-9 * (1 + s * zeta));
    EXPECT_NEAR(chance_margin(a, s * s * p, delta), s * zeta, 1e-9 * (1 + s * zeta));
  }
}

TEST(ChanceMargin, MonotoneInDelta) {
  const Eigen::Vector3d a(0, 1, 0);
  const Eigen::Matrix3d p = 2.5 * Eigen::Matrix3d::Identity();
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.49}) {
    const double z = chance_margin(a, p, delta);
    EXPECT_LT(z, prev);
    prev = z;
  }
  EXPECT_THROW(chance_margin(a, p, 0.0), std::invalid_argument);
  EXPECT_THROW(chance_margin(a, p, 1.0), std::invalid_argument);
}

TEST(ChanceMargin, DegenerateCovarianceClampsAtZero) {
  // Covariance with a null direction: margin along it is exactly 0.
  Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
  p(0, 0) = 4.0;
  EXPECT_DOUBLE_EQ(chance_margin(Eigen::Vector3d(0, 1, 0), p, 0.1), 0.0);
  EXPECT_GT(chance_margin(Eigen::Vector3d(1, 0, 0), p, 0.1), 0.0);
}

TEST(GaussianBelief, ValidateFlagsBadCovariance) {
  GaussianBelief b = paper_start();
  EXPECT_NO_THROW(b.validate());
  b.covariance(0, 1) = 0.5;  // asymmetric
  EXPECT_THROW(b.validate(), std::invalid_argument);
  b.covariance(0, 1) = 0.0;
  b.covariance(1, 0) = 0.0;
  b.covariance(2, 2) = -1.0;  // indefinite
  EXPECT_THROW(b.validate(), std::invalid_argument);
}

TEST(SigmaPoints, IndefiniteCovarianceThrows) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(3, 3);
  cov(2, 2) = -1.0;
  EXPECT_THROW(sigma_points(Eigen::VectorXd::Zero(3), cov, UtConfig{}), std::runtime_error);
}

}  // namespace
}  // namespace ucover
