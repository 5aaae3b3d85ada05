#pragma once
// Monte-Carlo rollout harness. Plans are open loop, so validation replays
// the planned controls through the true stochastic dynamics (not the
// unscented approximation) and measures how often the probabilistic
// guarantees actually hold.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ucover/dynamics.hpp"
#include "ucover/geometry.hpp"
#include "ucover/math.hpp"
#include "ucover/mission.hpp"
#include "ucover/solver.hpp"

namespace ucover {

// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct RolloutBatch {
  std::uint64_t seed = 0;
  int sample_count = 0;
  std::vector<std::vector<AgentState>> trajectories;  // S x (T+1)
};

// Rollout i draws from a stream seeded by (seed, i): first the 5 initial
// state deviates in component order, then 3 noise deviates per step. The
// aggregation order is fixed, so batches are reproducible bit for bit.
inline RolloutBatch sample_rollouts(const MissionSpec& spec, const PlanResult& plan,
                                    int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample_rollouts: need samples >= 1");
  const int T = static_cast<int>(plan.controls.size());
  const Eigen::MatrixXd root_p0 = sqrt_psd(spec.initial_belief.covariance);
  const Eigen::MatrixXd root_q = sqrt_psd(spec.disturbance.covariance());

  RolloutBatch batch;
  batch.seed = seed;
  batch.sample_count = samples;
  batch.trajectories.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    NormalSampler rng(derive_seed(seed, i));
    Eigen::VectorXd z0(5);
    for (int k = 0; k < 5; ++k) z0[k] = rng();
    const Eigen::VectorXd x0 = spec.initial_belief.mean + root_p0 * z0;
    std::vector<Eigen::Vector3d> noises(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      Eigen::Vector3d z;
      for (int k = 0; k < 3; ++k) z[k] = rng();
      noises[static_cast<std::size_t>(t)] = spec.disturbance.mean + root_q * z;
    }
    batch.trajectories[static_cast<std::size_t>(i)] =
        rollout(AgentState::from_vector(x0), plan.controls, noises, spec.dt);
  }
  return batch;
}

struct ValidationReport {
  std::uint64_t seed = 0;
  int sample_count = 0;
  // Worst-case 99% binomial half-width z/(2 sqrt(S)): the normal-approx
  // width maximized over the unknown rate. One number serves every
  // frequency below.
  double half_width = 0.0;

  // Waypoint n at its visit step: fraction of samples strictly outside face
  // l, and outside the cube altogether.
  std::vector<std::vector<double>> waypoint_face_rates;  // N x 6
  std::vector<double> waypoint_joint_miss;               // N

  // Obstacle xi at step t (1..T stored at t-1): fraction of samples inside.
  std::vector<std::vector<double>> obstacle_collision_rates;  // Xi x T

  // Divergence between the planned beliefs and the empirical moments, per
  // step 0..T: mean as an absolute infinity norm, covariance as the largest
  // entry error normalized by the empirical standard deviations.
  std::vector<double> mean_divergence;
  std::vector<double> cov_divergence;

  std::vector<double> facet_coverage_rates;  // N
  double full_coverage_fraction = 0.0;
};

namespace detail {

inline bool sample_covers(const MissionSpec& spec, const PlanResult& plan, int n,
                          const std::vector<AgentState>& traj) {
  const int slot = plan.visit_step[static_cast<std::size_t>(n)] - 1;
  const int m = plan.fov_schedule[static_cast<std::size_t>(slot)];
  const Eigen::Vector3d p = traj[static_cast<std::size_t>(slot) + 1].position();
  const ConvexPolytope& body = spec.fov_states[static_cast<std::size_t>(m)].half_spaces_body;
  const Facet& facet = spec.facets_to_cover[static_cast<std::size_t>(n)];
  if (spec.cover_vertices) {
    for (const auto& v : facet.vertices) {
      if (!point_in_polytope(v - p, body, 1e-12)) return false;
    }
    return true;
  }
  return point_in_polytope(facet.centroid - p, body, 1e-12);
}

}  // namespace detail

inline ValidationReport check_chance_constraints(const MissionSpec& spec,
                                                 const PlanResult& plan,
                                                 const RolloutBatch& batch) {
  if (batch.trajectories.empty()) {
    throw std::invalid_argument("check_chance_constraints: empty batch");
  }
  if (plan.visit_step.size() != spec.waypoints.size()) {
    throw std::invalid_argument("check_chance_constraints: plan lacks visit times");
  }
  const int S = batch.sample_count;
  const int T = static_cast<int>(plan.controls.size());
  const int N = spec.waypoint_count();
  const int Xi = spec.obstacle_count();

  ValidationReport rep;
  rep.seed = batch.seed;
  rep.sample_count = S;
  rep.half_width = kZ99 / (2.0 * std::sqrt(static_cast<double>(S)));

  rep.waypoint_face_rates.assign(static_cast<std::size_t>(N), std::vector<double>(6, 0.0));
  rep.waypoint_joint_miss.assign(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; ++n) {
    const auto& faces = spec.waypoints[static_cast<std::size_t>(n)].cube.faces;
    const int bt = plan.visit_step[static_cast<std::size_t>(n)];
    std::vector<int> face_hits(6, 0);
    int joint = 0;
    for (const auto& traj : batch.trajectories) {
      const Eigen::Vector3d p = traj[static_cast<std::size_t>(bt)].position();
      bool any = false;
      for (int l = 0; l < 6; ++l) {
        const HalfSpace& f = faces[static_cast<std::size_t>(l)];
        if (f.normal.dot(p) > f.offset) {
          ++face_hits[static_cast<std::size_t>(l)];
          any = true;
        }
      }
      if (any) ++joint;
    }
    for (int l = 0; l < 6; ++l) {
      rep.waypoint_face_rates[static_cast<std::size_t>(n)][static_cast<std::size_t>(l)] =
          static_cast<double>(face_hits[static_cast<std::size_t>(l)]) / S;
    }
    rep.waypoint_joint_miss[static_cast<std::size_t>(n)] = static_cast<double>(joint) / S;
  }

  rep.obstacle_collision_rates.assign(static_cast<std::size_t>(Xi),
                                      std::vector<double>(static_cast<std::size_t>(T), 0.0));
  for (int xi = 0; xi < Xi; ++xi) {
    const ConvexPolytope& obs = spec.obstacles[static_cast<std::size_t>(xi)];
    for (int bt = 1; bt <= T; ++bt) {
      int hits = 0;
      for (const auto& traj : batch.trajectories) {
        if (point_in_polytope(traj[static_cast<std::size_t>(bt)].position(), obs, 1e-12)) {
          ++hits;
        }
      }
      rep.obstacle_collision_rates[static_cast<std::size_t>(xi)]
                                  [static_cast<std::size_t>(bt) - 1] =
          static_cast<double>(hits) / S;
    }
  }

  rep.mean_divergence.resize(static_cast<std::size_t>(T) + 1);
  rep.cov_divergence.resize(static_cast<std::size_t>(T) + 1);
  Eigen::VectorXd mean(5);
  Eigen::MatrixXd cov(5, 5);
  for (int bt = 0; bt <= T; ++bt) {
    mean.setZero();
    for (const auto& traj : batch.trajectories) {
      mean += traj[static_cast<std::size_t>(bt)].to_vector();
    }
    mean /= S;
    cov.setZero();
    for (const auto& traj : batch.trajectories) {
      const Eigen::VectorXd d = traj[static_cast<std::size_t>(bt)].to_vector() - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= S;

    const auto& bel = plan.beliefs[static_cast<std::size_t>(bt)];
    rep.mean_divergence[static_cast<std::size_t>(bt)] =
        (mean - bel.mean).cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const double scale = std::sqrt(std::max(cov(i, i) * cov(j, j), 1e-24));
        worst = std::max(worst, std::abs(cov(i, j) - bel.covariance(i, j)) / scale);
      }
    }
    rep.cov_divergence[static_cast<std::size_t>(bt)] = worst;
  }
  return rep;
}

struct CoverageStats {
  std::vector<double> facet_rates;
  double full_fraction = 0.0;
};

inline CoverageStats check_coverage(const MissionSpec& spec, const PlanResult& plan,
                                    const RolloutBatch& batch) {
  if (plan.fov_schedule.empty() && spec.waypoint_count() > 0) {
    throw std::invalid_argument("check_coverage: plan lacks a camera schedule");
  }
  const int N = spec.waypoint_count();
  const int S = batch.sample_count;
  CoverageStats stats;
  stats.facet_rates.assign(static_cast<std::size_t>(N), 0.0);
  int full = 0;
  for (const auto& traj : batch.trajectories) {
    bool all = true;
    for (int n = 0; n < N; ++n) {
      if (detail::sample_covers(spec, plan, n, traj)) {
        stats.facet_rates[static_cast<std::size_t>(n)] += 1.0;
      } else {
        all = false;
      }
    }
    if (all) ++full;
  }
  for (auto& r : stats.facet_rates) r /= S;
  stats.full_fraction = static_cast<double>(full) / S;
  return stats;
}

inline ValidationReport validate_plan(const MissionSpec& spec, const PlanResult& plan,
                                      const RolloutBatch& batch) {
  ValidationReport rep = check_chance_constraints(spec, plan, batch);
  const CoverageStats cov = check_coverage(spec, plan, batch);
  rep.facet_coverage_rates = cov.facet_rates;
  rep.full_coverage_fraction = cov.full_fraction;
  return rep;
}

}  // namespace ucover
