#include "ucover/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "test_missions.hpp"
#include "ucover/mission_io.hpp"

namespace ucover {
namespace {

using testmission::small_mission;
using testmission::tiny_mission;

SolverConfig tight_config() {
  SolverConfig cfg;
  cfg.constraint_tol = 1e-8;
  cfg.optimality_tol = 1e-9;
  cfg.relax_schedule = {0.0};
  return cfg;
}

// n-dim box problem with a quadratic objective centered at c.
NlpProblem quadratic_problem(const Eigen::VectorXd& c, double lo, double hi) {
  NlpProblem p;
  p.n = static_cast<int>(c.size());
  p.n_eq = 0;
  p.n_ineq = 0;
  p.lower = Eigen::VectorXd::Constant(p.n, lo);
  p.upper = Eigen::VectorXd::Constant(p.n, hi);
  p.objective = [c](const Eigen::VectorXd& x) { return (x - c).squaredNorm(); };
  p.residuals = [](const Eigen::VectorXd&, Eigen::VectorXd& h, Eigen::VectorXd& g) {
    h.resize(0);
    g.resize(0);
  };
  p.weighted_gradient = [c](const Eigen::VectorXd& x, double wf, const Eigen::VectorXd&,
                            const Eigen::VectorXd&) -> Eigen::VectorXd {
    return wf * 2.0 * (x - c);
  };
  return p;
}

TEST(AugmentedLagrangian, UnconstrainedQuadratic) {
  Eigen::VectorXd c(3);
  c << 1.0, -2.0, 0.5;
  const NlpProblem p = quadratic_problem(c, -10.0, 10.0);
  const AlOutcome out = augmented_lagrangian_solve(p, Eigen::VectorXd::Zero(3), tight_config());
  EXPECT_LT((out.x - c).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LE(out.pg_norm, 1e-9);
  EXPECT_DOUBLE_EQ(out.true_violation, 0.0);
  EXPECT_GT(out.iterations, 0);
}

TEST(AugmentedLagrangian, ActiveBoxBound) {
  // Minimum of (x+5)^2 over [0, 1] sits at the lower bound.
  Eigen::VectorXd c(1);
  c << -5.0;
  const NlpProblem p = quadratic_problem(c, 0.0, 1.0);
  Eigen::VectorXd x0(1);
  x0 << 0.7;
  const AlOutcome out = augmented_lagrangian_solve(p, x0, tight_config());
  EXPECT_NEAR(out.x[0], 0.0, 1e-12);
  EXPECT_LE(out.pg_norm, 1e-9);
}

TEST(AugmentedLagrangian, EqualityToy) {
  // min x0^2 + x1^2 s.t. x0 + x1 = 1 -> (0.5, 0.5).
  NlpProblem p;
  p.n = 2;
  p.n_eq = 1;
  p.n_ineq = 0;
  p.lower = Eigen::VectorXd::Constant(2, -10.0);
  p.upper = Eigen::VectorXd::Constant(2, 10.0);
  p.objective = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& h, Eigen::VectorXd& g) {
    h.resize(1);
    h[0] = x[0] + x[1] - 1.0;
    g.resize(0);
  };
  p.weighted_gradient = [](const Eigen::VectorXd& x, double wf, const Eigen::VectorXd& wh,
                           const Eigen::VectorXd&) -> Eigen::VectorXd {
    Eigen::VectorXd grad = wf * 2.0 * x;
    grad[0] += wh[0];
    grad[1] += wh[0];
    return grad;
  };
  Eigen::VectorXd x0(2);
  x0 << 4.0, -7.0;
  const AlOutcome out = augmented_lagrangian_solve(p, x0, tight_config());
  EXPECT_NEAR(out.x[0], 0.5, 1e-6);
  EXPECT_NEAR(out.x[1], 0.5, 1e-6);
  EXPECT_LE(out.true_violation, 1e-8);

  // Accepted incumbents never increase the violation.
  for (std::size_t i = 1; i < out.violation_trace.size(); ++i) {
    EXPECT_LT(out.violation_trace[i], out.violation_trace[i - 1]);
  }
}

TEST(AugmentedLagrangian, InequalityToy) {
  // min (x0+2)^2 s.t. x0 >= 1: active at x0 = 1.
  // min (x0-2)^2 under the same constraint: inactive, x0 = 2.
  for (const double center : {-2.0, 2.0}) {
    NlpProblem p;
    p.n = 1;
    p.n_eq = 0;
    p.n_ineq = 1;
    p.lower = Eigen::VectorXd::Constant(1, -10.0);
    p.upper = Eigen::VectorXd::Constant(1, 10.0);
    p.objective = [center](const Eigen::VectorXd& x) {
      return (x[0] - center) * (x[0] - center);
    };
    p.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& h, Eigen::VectorXd& g) {
      h.resize(0);
      g.resize(1);
      g[0] = 1.0 - x[0];
    };
    p.weighted_gradient = [center](const Eigen::VectorXd& x, double wf,
                                   const Eigen::VectorXd&,
                                   const Eigen::VectorXd& wg) -> Eigen::VectorXd {
      Eigen::VectorXd grad(1);
      grad[0] = wf * 2.0 * (x[0] - center) - wg[0];
      return grad;
    };
    Eigen::VectorXd x0(1);
    x0 << 5.0;
    const AlOutcome out = augmented_lagrangian_solve(p, x0, tight_config());
    const double expect = center < 1.0 ? 1.0 : center;
    EXPECT_NEAR(out.x[0], expect, 1e-6) << "center " << center;
    EXPECT_LE(out.true_violation, 1e-8);
  }
}

TEST(AugmentedLagrangian, RejectsBadInputs) {
  const NlpProblem p = quadratic_problem(Eigen::VectorXd::Zero(2), -1.0, 1.0);
  EXPECT_THROW(augmented_lagrangian_solve(p, Eigen::VectorXd::Zero(3), SolverConfig{}),
               std::invalid_argument);
  SolverConfig bad;
  bad.penalty_growth = 0.5;
  EXPECT_THROW(augmented_lagrangian_solve(p, Eigen::VectorXd::Zero(2), bad),
               std::invalid_argument);
  SolverConfig neg;
  neg.relax_schedule = {-0.1};
  EXPECT_THROW(augmented_lagrangian_solve(p, Eigen::VectorXd::Zero(2), neg),
               std::invalid_argument);
}

TEST(InitialGuess, StructuredSeed) {
  const MissionSpec spec = small_mission(20);
  const DecisionVector dec = initial_guess(spec);
  const DecisionLayout& lay = dec.layout;

  // Controls respect the bounds and the whole vector sits in the box.
  const TranscribedProgram prog(spec);
  for (int i = 0; i < lay.total; ++i) {
    EXPECT_GE(dec.x[i], prog.lower_bounds()[i] - 1e-12) << i;
    EXPECT_LE(dec.x[i], prog.upper_bounds()[i] + 1e-12) << i;
  }

  // Face indicators at half activation, counters on their coupling surface.
  EXPECT_DOUBLE_EQ(dec.w1(3, 0, 2), 0.5);
  EXPECT_DOUBLE_EQ(dec.w2(3, 0), -3.0);
  EXPECT_DOUBLE_EQ(dec.g1(5, 0, 0, 1, 4), 0.5);
  EXPECT_DOUBLE_EQ(dec.g2(5, 0, 0, 1), -2.5);

  // Soft visit assignment normalized per waypoint.
  double w3sum = 0.0;
  for (int t = 0; t < lay.T; ++t) w3sum += dec.w3(t, 0);
  EXPECT_NEAR(w3sum, 1.0, 1e-12);

  // Camera selector sums to one but is not exactly uniform.
  for (int t = 0; t < lay.T; ++t) {
    double ssum = 0.0;
    for (int m = 0; m < lay.M; ++m) ssum += dec.s(t, m);
    EXPECT_NEAR(ssum, 1.0, 1e-12);
    EXPECT_NE(dec.s(t, 0), dec.s(t, 1));
  }

  // Obstacle selector is one-hot on the most separating face of the seeded
  // mean rollout.
  AgentState s = AgentState::from_vector(spec.initial_belief.mean);
  for (int t = 0; t < lay.T; ++t) {
    s = step(s, dec.control(t), Eigen::Vector3d::Zero(), spec.dt);
    const Eigen::Vector3d p = s.position();
    int ones = 0, argmax = -1;
    double best = -1e300;
    const auto& faces = spec.obstacles[0].faces;
    for (int j = 0; j < 6; ++j) {
      const double margin = faces[static_cast<std::size_t>(j)].normal.dot(p) -
                            faces[static_cast<std::size_t>(j)].offset;
      if (margin > best) {
        best = margin;
        argmax = j;
      }
      if (dec.o(t, 0, j) == 1.0) ++ones;
      EXPECT_TRUE(dec.o(t, 0, j) == 0.0 || dec.o(t, 0, j) == 1.0);
    }
    EXPECT_EQ(ones, 1);
    EXPECT_DOUBLE_EQ(dec.o(t, 0, argmax), 1.0);
  }

  // Seeds are reproducible and nonzero seeds actually perturb the tour.
  const DecisionVector again = initial_guess(spec);
  EXPECT_EQ(dec.x, again.x);
  const DecisionVector shaken = initial_guess(spec, 7);
  EXPECT_EQ(shaken.x, initial_guess(spec, 7).x);
  EXPECT_NE(dec.x, shaken.x);
}

TEST(Solve, DeskScaleMissionIsFeasible) {
  const MissionSpec spec = small_mission(20);
  const TranscribedProgram prog(spec);
  SolverConfig cfg;
  cfg.rng_seed = 1;
  cfg.multistart_count = 2;
  cfg.max_outer_iters = 30;

  const auto [dec, report] = solve(prog, initial_guess(spec), cfg);
  EXPECT_TRUE(report.status == SolveStatus::feasible ||
              report.status == SolveStatus::optimal)
      << to_string(report.status);
  EXPECT_LE(report.max_violation, cfg.constraint_tol);
  EXPECT_GT(report.iterations, 0);
  EXPECT_GT(report.wall_time_s, 0.0);

  // The reported violation is the independent re-check, reproducible here.
  EXPECT_DOUBLE_EQ(independent_violation(spec, dec).max_violation, report.max_violation);
  for (std::size_t i = 1; i < report.violation_trace.size(); ++i) {
    EXPECT_LT(report.violation_trace[i], report.violation_trace[i - 1]);
  }

  const PlanResult plan = extract_plan(spec, dec);
  ASSERT_EQ(plan.visit_step.size(), 1u);
  EXPECT_GE(plan.visit_step[0], 1);
  EXPECT_LE(plan.visit_step[0], 20);
  EXPECT_TRUE(plan.covered[0]);

  // Visit actually lands inside the waypoint cube.
  const Eigen::Vector3d p =
      plan.beliefs[static_cast<std::size_t>(plan.visit_step[0])].position_mean();
  EXPECT_TRUE(point_in_polytope(p, spec.waypoints[0].cube, 1e-6));
}

TEST(Solve, DeterministicAcrossRuns) {
  const MissionSpec spec = small_mission(8);
  const TranscribedProgram prog(spec);
  SolverConfig cfg;
  cfg.rng_seed = 3;
  cfg.multistart_count = 2;
  cfg.max_outer_iters = 12;

  const DecisionVector init = initial_guess(spec);
  const auto [dec1, rep1] = solve(prog, init, cfg);
  const auto [dec2, rep2] = solve(prog, init, cfg);
  EXPECT_EQ(dec1.x, dec2.x);
  EXPECT_EQ(rep1.status, rep2.status);
  EXPECT_EQ(rep1.objective, rep2.objective);
  EXPECT_EQ(rep1.max_violation, rep2.max_violation);
  EXPECT_EQ(rep1.iterations, rep2.iterations);
  EXPECT_EQ(rep1.start_index, rep2.start_index);
  EXPECT_EQ(rep1.violation_trace, rep2.violation_trace);
}

TEST(ExtractPlan, ArgmaxAndTieBreaks) {
  const MissionSpec spec = small_mission(6);
  DecisionVector dec(DecisionLayout::make(spec));
  dec.w3(2, 0) = 0.6;
  dec.w3(4, 0) = 0.6;  // tie resolves toward the earlier step
  dec.s(2, 0) = 0.5;
  dec.s(2, 1) = 0.5;  // tie resolves toward the smaller index
  dec.s(0, 1) = 0.9;

  const PlanResult plan = extract_plan(spec, dec, 1e9);
  EXPECT_EQ(plan.visit_step[0], 3);
  EXPECT_EQ(plan.fov_schedule[2], 0);
  EXPECT_EQ(plan.fov_schedule[0], 1);
  ASSERT_EQ(plan.controls.size(), 6u);
  ASSERT_EQ(plan.beliefs.size(), 7u);
}

TEST(ExtractPlan, RefusesInfeasibleVector) {
  const MissionSpec spec = small_mission(6);
  const DecisionVector dec(DecisionLayout::make(spec));
  try {
    extract_plan(spec, dec);
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos);
  }
}

TEST(IndependentViolation, RanksWorstRows) {
  const MissionSpec spec = small_mission(6);
  DecisionVector dec(DecisionLayout::make(spec));
  const ViolationSummary v = independent_violation(spec, dec, 3);
  // Zero decision vector: the face-count equalities sit at exactly L and Lf.
  EXPECT_DOUBLE_EQ(v.max_violation, 6.0);
  ASSERT_EQ(v.worst.size(), 3u);
  EXPECT_DOUBLE_EQ(v.worst[0].second, 6.0);
  EXPECT_NE(v.worst[0].first.find("waypoint_face_count"), std::string::npos);
  EXPECT_GE(v.worst[0].second, v.worst[1].second);
  EXPECT_GE(v.worst[1].second, v.worst[2].second);
}

// Tightening the waypoint miss bound enlarges the face margins, which forces
// the visit-time mean deeper into the cube. Neighbouring deltas differ by
// less than the solver's polish scatter, so the ordering claim is made on the
// endpoints only; every delta must still solve to feasibility.
TEST(Solve, WaypointMarginTightensWithDelta) {
  const std::filesystem::path dir = ::testing::TempDir();
  const auto mission_path = write_fixture("single-waypoint", dir / "swp_trend");
  const ResolvedMission rm = resolve_mission(parse_mission_file(mission_path));

  std::vector<double> dist;
  for (const double delta : {0.4, 0.2, 0.05, 0.01}) {
    MissionSpec spec = rm.spec;
    spec.delta_w = delta;
    const TranscribedProgram prog(spec);
    const auto [dec, report] = solve(prog, initial_guess(spec), rm.solver);
    ASSERT_LE(report.max_violation, 1e-3) << "delta " << delta;
    const PlanResult plan = extract_plan(spec, dec);
    const Eigen::Vector3d p =
        plan.beliefs[static_cast<std::size_t>(plan.visit_step[0])].position_mean();
    dist.push_back((p - spec.waypoints[0].center).norm());
  }
  EXPECT_LT(dist.back(), dist.front());
}

}  // namespace
}  // namespace ucover
