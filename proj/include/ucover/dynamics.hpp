#pragma once
// Discrete-time stochastic UAV motion model and open-loop rollout helpers.
// The position update intentionally mixes cos(phi)sin(theta) on x with
// sin(phi)cos(theta) on y; the model is evaluated verbatim, with no speed
// normalization.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ucover/math.hpp"

namespace ucover {

using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

// Pose: position in meters, pitch-like angle theta in [-pi/2, pi/2], yaw phi
// in (-pi, pi].
struct AgentState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  Vector5d to_vector() const {
    Vector5d v;
    v << x, y, z, theta, phi;
    return v;
  }
  static AgentState from_vector(const Vector5d& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
  Eigen::Vector3d position() const { return {x, y, z}; }
};

struct ControlInput {
  double v = 0.0;        // linear velocity, m/s
  double w_theta = 0.0;  // pitch rate, rad/s
  double w_phi = 0.0;    // yaw rate, rad/s
};

// Additive Gaussian control disturbance with diagonal covariance.
struct DisturbanceModel {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d q_diag = Eigen::Vector3d::Zero();  // (sigma_v^2, sigma_theta^2, sigma_phi^2)

  Eigen::Matrix3d covariance() const { return q_diag.asDiagonal(); }
  void validate() const {
    if (q_diag.minCoeff() < 0.0) {
      throw std::invalid_argument("DisturbanceModel: variances must be nonnegative");
    }
  }
};

// Symmetric box bounds on the control input.
struct ControlBounds {
  double v_max = 0.0;
  double omega_max = 0.0;
};

// One model step without angle normalization.  Used wherever moments are
// computed in the unwrapped angle chart (sigma-point propagation); operating
// angles stay far from the wrap seam in all supported scenarios.
inline AgentState step_raw(const AgentState& s, const ControlInput& u,
                           const Eigen::Vector3d& noise, double dt) {
  const double v = u.v + noise[0];
  AgentState out = s;
  out.x += dt * v * std::cos(s.phi) * std::sin(s.theta);
  out.y += dt * v * std::sin(s.phi) * std::cos(s.theta);
  out.z += dt * v * std::sin(s.theta);
  out.theta += dt * (u.w_theta + noise[1]);
  out.phi += dt * (u.w_phi + noise[2]);
  return out;
}

// One model step with the declared angle domains restored: phi wraps to
// (-pi, pi], theta saturates at +-pi/2.
inline AgentState step(const AgentState& s, const ControlInput& u,
                       const Eigen::Vector3d& noise, double dt) {
  AgentState out = step_raw(s, u, noise, dt);
  out.theta = std::clamp(out.theta, -kPi / 2, kPi / 2);
  out.phi = wrap_angle(out.phi);
  return out;
}

// Applies `controls[t]` with `noises[t]` for t = 0..T-1; returns the T+1
// visited states including x0.
inline std::vector<AgentState> rollout(const AgentState& x0,
                                       const std::vector<ControlInput>& controls,
                                       const std::vector<Eigen::Vector3d>& noises,
                                       double dt) {
  if (controls.size() != noises.size()) {
    throw std::invalid_argument("rollout: controls and noises must have equal length");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rollout: dt must be positive");
  }
  std::vector<AgentState> traj;
  traj.reserve(controls.size() + 1);
  traj.push_back(x0);
  for (std::size_t t = 0; t < controls.size(); ++t) {
    traj.push_back(step(traj.back(), controls[t], noises[t], dt));
  }
  return traj;
}

}  // namespace ucover
