#pragma once
// Unscented-transform machinery: augmented moments, sigma points and weights,
// propagation of a Gaussian state belief through the motion model, and the
// half-space chance-constraint margins derived from the Gaussian quantile.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ucover/dynamics.hpp"
#include "ucover/math.hpp"

namespace ucover {

// Scaling parameters of the unscented transform.  `dim` is the augmented
// dimension the mission pipeline uses (5 state + 3 noise).
struct UtConfig {
  double alpha = 1.0;
  double rho = 2.5;
  double beta = 2.0;
  int dim = 8;

  double lambda(int d) const { return alpha * alpha * (d + rho) - d; }

  void validate() const {
    if (!(dim > 0)) throw std::invalid_argument("UtConfig: dim must be positive");
    if (!(dim + lambda(dim) > 0.0)) {
      throw std::invalid_argument("UtConfig: d + lambda must be positive");
    }
  }
};

// 2d+1 sigma points (columns) with their mean and covariance weights.
// points.col(0) is the input mean; columns 1..d and d+1..2d are antipodal
// about it.
struct SigmaSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd mean_weights;
  Eigen::VectorXd cov_weights;
};

// Gaussian over the 5-dim agent state (x, y, z, theta, phi).
struct GaussianBelief {
  Vector5d mean = Vector5d::Zero();
  Matrix5d covariance = Matrix5d::Zero();

  Eigen::Vector3d position_mean() const { return mean.head<3>(); }
  Eigen::Matrix3d position_cov() const { return covariance.topLeftCorner<3, 3>(); }

  void validate(double sym_tol = 1e-10, double eig_tol = 1e-9) const {
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > sym_tol) {
      throw std::invalid_argument("GaussianBelief: covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix5d> es(covariance);
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -eig_tol * scale) {
      throw std::invalid_argument("GaussianBelief: covariance not PSD");
    }
  }
};

// Stacks the state belief with the control disturbance: mean concatenation,
// block-diagonal covariance.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> augment(const GaussianBelief& belief,
                                                           const DisturbanceModel& dist) {
  Eigen::VectorXd mean(8);
  mean << belief.mean, dist.mean;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(8, 8);
  cov.topLeftCorner<5, 5>() = belief.covariance;
  cov.bottomRightCorner<3, 3>() = dist.covariance();
  return {std::move(mean), std::move(cov)};
}

// Sigma points for an arbitrary-dimension Gaussian.  The matrix square root
// is the lower Cholesky factor, so point i offsets along sqrt(d+lambda) times
// the i-th column of L (equivalently the i-th row of L^T).
inline SigmaSet sigma_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                             const UtConfig& cfg) {
  const int d = static_cast<int>(mean.size());
  if (cov.rows() != d || cov.cols() != d) {
    throw std::invalid_argument("sigma_points: dimension mismatch");
  }
  const double lambda = cfg.lambda(d);
  const double scale = d + lambda;
  if (!(scale > 0.0)) throw std::invalid_argument("sigma_points: d + lambda must be positive");

  const Eigen::MatrixXd root = std::sqrt(scale) * cholesky_psd(cov);

  SigmaSet s;
  s.points.resize(d, 2 * d + 1);
  s.points.col(0) = mean;
  for (int i = 0; i < d; ++i) {
    s.points.col(1 + i) = mean + root.col(i);
    s.points.col(1 + d + i) = mean - root.col(i);
  }
  s.mean_weights.resize(2 * d + 1);
  s.cov_weights.resize(2 * d + 1);
  s.mean_weights[0] = lambda / scale;
  s.cov_weights[0] = lambda / scale + (1.0 - cfg.alpha * cfg.alpha + cfg.beta);
  const double wi = 0.5 / scale;
  for (int i = 1; i <= 2 * d; ++i) {
    s.mean_weights[i] = wi;
    s.cov_weights[i] = wi;
  }
  return s;
}

// Pushes a Gaussian through an arbitrary map y = f(x) by transforming the
// sigma points and re-estimating moments.  Exact for affine f.
template <typename F>
std::pair<Eigen::VectorXd, Eigen::MatrixXd> ut_transform(const Eigen::VectorXd& mean,
                                                         const Eigen::MatrixXd& cov,
                                                         const UtConfig& cfg, F&& f) {
  const SigmaSet s = sigma_points(mean, cov, cfg);
  const int count = static_cast<int>(s.points.cols());
  Eigen::VectorXd first = f(Eigen::VectorXd(s.points.col(0)));
  Eigen::MatrixXd transformed(first.size(), count);
  transformed.col(0) = first;
  for (int i = 1; i < count; ++i) {
    transformed.col(i) = f(Eigen::VectorXd(s.points.col(i)));
  }
  Eigen::VectorXd out_mean = transformed * s.mean_weights;
  Eigen::MatrixXd centered = transformed.colwise() - out_mean;
  Eigen::MatrixXd out_cov = centered * s.cov_weights.asDiagonal() * centered.transpose();
  out_cov = 0.5 * (out_cov + out_cov.transpose()).eval();
  return {std::move(out_mean), std::move(out_cov)};
}

// One belief step: augment with the disturbance, transform the sigma set
// through the motion model, and read the posterior moments back off the
// 5-dim state half.  Moments stay in the unwrapped angle chart.
inline GaussianBelief propagate(const GaussianBelief& belief, const DisturbanceModel& dist,
                                const ControlInput& u, double dt, const UtConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  const auto [mean8, cov8] = augment(belief, dist);
  const SigmaSet s = sigma_points(mean8, cov8, cfg);

  Eigen::Matrix<double, 5, Eigen::Dynamic> transformed(5, s.points.cols());
  for (int i = 0; i < s.points.cols(); ++i) {
    const AgentState state = AgentState::from_vector(s.points.col(i).head<5>());
    const Eigen::Vector3d noise = s.points.col(i).tail<3>();
    transformed.col(i) = step_raw(state, u, noise, dt).to_vector();
  }

  GaussianBelief out;
  out.mean = transformed * s.mean_weights;
  Eigen::Matrix<double, 5, Eigen::Dynamic> centered = transformed.colwise() - out.mean;
  out.covariance = centered * s.cov_weights.asDiagonal() * centered.transpose();
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  return out;
}

// Chance-constraint margin for the half-space a.p <= b under position
// covariance P: zeta = sqrt(2 a^T P a) * erfinv(1 - 2 delta).  Positive for
// delta < 0.5 (tightening), zero at 0.5, negative beyond.
inline double chance_margin(const Eigen::Vector3d& a, const Eigen::Matrix3d& p_pos,
                            double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("chance_margin: delta must lie in (0, 1)");
  }
  const double q = std::max(0.0, a.dot(p_pos * a));
  return std::sqrt(2.0 * q) * erf_inv(1.0 - 2.0 * delta);
}

}  // namespace ucover
