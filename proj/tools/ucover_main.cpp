// Command-line front end: generate fixture missions, solve them into robust
// coverage plans, validate plans by Monte-Carlo rollout, and export plan
// geometry as CSV. Exit codes: 0 success, 1 solver failure or failed
// validation check, 2 file/argument errors.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ucover/mission_io.hpp"
#include "ucover/plan_io.hpp"
#include "ucover/program.hpp"
#include "ucover/solver.hpp"
#include "ucover/validation.hpp"

namespace {

int run_fixture(const std::string& name, const std::string& out) {
  const auto path = ucover::write_fixture(name, out);
  std::cout << "fixture: wrote " << path.string() << "\n";
  return 0;
}

int run_plan(const std::string& mission_path, const std::string& out,
             const std::vector<std::string>& overrides) {
  ucover::MissionFile mf = ucover::parse_mission_file(mission_path);
  for (const auto& ov : overrides) ucover::apply_override_line(mf, ov);
  const ucover::ResolvedMission rm = ucover::resolve_mission(mf);

  std::cout << "plan: mission " << rm.content_hash << ", T=" << rm.spec.horizon << ", "
            << rm.spec.waypoint_count() << " waypoints, " << rm.spec.fov_count()
            << " camera states, " << rm.spec.obstacle_count() << " obstacles\n";

  const ucover::TranscribedProgram prog(rm.spec);
  const ucover::DecisionVector init = ucover::initial_guess(rm.spec);
  const auto [dec, report] = ucover::solve(prog, init, rm.solver);

  std::cout << "plan: status=" << ucover::to_string(report.status)
            << " objective=" << report.objective
            << " max_violation=" << report.max_violation
            << " iterations=" << report.iterations << " start=" << report.start_index
            << " wall_time=" << report.wall_time_s << "s\n";

  if (report.status != ucover::SolveStatus::optimal &&
      report.status != ucover::SolveStatus::feasible) {
    const auto summary = ucover::independent_violation(rm.spec, dec);
    for (const auto& [name, value] : summary.worst) {
      std::cout << "plan: violated " << name << " = " << value << "\n";
    }
    std::cerr << "plan: no feasible plan found\n";
    return 1;
  }

  const ucover::PlanResult result = ucover::extract_plan(rm.spec, dec);
  int covered = 0;
  for (const bool c : result.covered) covered += c ? 1 : 0;
  std::cout << "plan: covered " << covered << "/" << rm.spec.waypoint_count()
            << " facets; visit steps:";
  for (const int s : result.visit_step) std::cout << ' ' << s;
  std::cout << "\n";

  const ucover::PlanFile pf =
      ucover::make_plan_file(rm.spec, rm.content_hash, rm.full_mesh, result, report,
                             rm.solver.rng_seed, rm.solver.multistart_count, overrides);
  ucover::write_plan_file(out, pf);
  std::cout << "plan: wrote " << out << "\n";
  return 0;
}

int run_validate(const std::string& mission_path, const std::string& plan_path,
                 int samples, std::uint64_t seed, const std::string& out) {
  ucover::MissionFile mf = ucover::parse_mission_file(mission_path);
  const ucover::PlanFile pf = ucover::parse_plan_file(plan_path);
  for (const auto& ov : pf.overrides) ucover::apply_override_line(mf, ov);
  const ucover::ResolvedMission rm = ucover::resolve_mission(mf);
  if (rm.content_hash != pf.mission_hash) {
    std::cerr << "validate: plan was produced for mission " << pf.mission_hash
              << " but this mission resolves to " << rm.content_hash << "\n";
    return 2;
  }

  const ucover::PlanResult result = ucover::plan_result_from_file(rm.spec, pf);
  const ucover::RolloutBatch batch = ucover::sample_rollouts(rm.spec, result, samples, seed);
  const ucover::ValidationReport report = ucover::validate_plan(rm.spec, result, batch);
  const ucover::ValidationChecks checks = ucover::evaluate_checks(rm.spec, report);

  double worst_miss = 0.0;
  for (const auto& faces : report.waypoint_face_rates) {
    for (const double r : faces) worst_miss = std::max(worst_miss, r);
  }
  double worst_hit = 0.0;
  for (const auto& per_step : report.obstacle_collision_rates) {
    for (const double r : per_step) worst_hit = std::max(worst_hit, r);
  }
  std::cout << "validate: S=" << samples << " half_width=" << report.half_width << "\n";
  if (report.half_width >= 0.5) {
    std::cout << "validate: note: sample count too small for a meaningful interval\n";
  }
  std::cout << "validate: worst per-face waypoint miss rate " << worst_miss << " (allowed "
            << rm.spec.delta_w << " + " << report.half_width << ") -> "
            << (checks.waypoint_pass ? "pass" : "fail") << "\n";
  std::cout << "validate: worst obstacle collision rate " << worst_hit << " (allowed "
            << rm.spec.delta_o << " + " << report.half_width << ") -> "
            << (checks.obstacle_pass ? "pass" : "fail") << "\n";
  std::cout << "validate: full coverage fraction " << report.full_coverage_fraction << "\n";

  ucover::write_validation_report(out, rm.content_hash, report, checks);
  std::cout << "validate: wrote " << out << "\n";
  return (checks.waypoint_pass && checks.obstacle_pass) ? 0 : 1;
}

int run_export(const std::string& plan_path, const std::string& what,
               const std::string& out_dir) {
  const ucover::PlanFile pf = ucover::parse_plan_file(plan_path);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ucover::FileError("cannot create output directory: " + out_dir);
  if (what == "trajectory") {
    ucover::export_trajectory(pf, out_dir);
  } else if (what == "ellipsoids") {
    ucover::export_ellipsoids(pf, out_dir);
  } else if (what == "fov") {
    ucover::export_fov(pf, out_dir);
  } else if (what == "mesh") {
    ucover::export_mesh(pf, out_dir);
  } else {
    throw ucover::FileError("unknown export kind '" + what + "'");
  }
  std::cout << "export: wrote " << (std::filesystem::path(out_dir) / (what + ".csv")).string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistically robust 3D coverage planning"};
  app.require_subcommand(1);

  auto* fixture = app.add_subcommand("fixture", "write a built-in example mission");
  std::string fixture_name, fixture_out;
  fixture->add_option("name", fixture_name,
                      "one of: paper-full, paper-small, single-waypoint, corridor")
      ->required();
  fixture->add_option("-o,--output", fixture_out, "mission file to write")->required();

  auto* plan = app.add_subcommand("plan", "solve a mission into a coverage plan");
  std::string plan_mission, plan_out;
  std::string opt_delta_w, opt_delta_o, opt_seed, opt_multistarts, opt_horizon;
  plan->add_option("mission", plan_mission, "mission file")->required();
  plan->add_option("-o,--output", plan_out, "plan file to write")->required();
  plan->add_option("--delta-w", opt_delta_w, "override waypoint miss probability bound");
  plan->add_option("--delta-o", opt_delta_o, "override collision probability bound");
  plan->add_option("--seed", opt_seed, "override solver seed");
  plan->add_option("--multistarts", opt_multistarts, "override multistart count");
  plan->add_option("-T,--horizon", opt_horizon, "override mission horizon");

  auto* validate = app.add_subcommand("validate", "Monte-Carlo check a plan");
  std::string val_mission, val_plan, val_out;
  int val_samples = 1000;
  std::uint64_t val_seed = 1;
  validate->add_option("mission", val_mission, "mission file")->required();
  validate->add_option("plan", val_plan, "plan file")->required();
  validate->add_option("-S,--samples", val_samples, "rollout count")->check(CLI::PositiveNumber);
  validate->add_option("--seed", val_seed, "rollout seed");
  validate->add_option("-o,--output", val_out, "report file to write")->required();

  auto* exp = app.add_subcommand("export", "write plan geometry as CSV");
  std::string exp_plan, exp_what, exp_out;
  exp->add_option("plan", exp_plan, "plan file")->required();
  exp->add_option("--what", exp_what, "trajectory, ellipsoids, fov, or mesh")->required();
  exp->add_option("-o,--output", exp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(fixture)) return run_fixture(fixture_name, fixture_out);
    if (app.got_subcommand(plan)) {
      std::vector<std::string> overrides;
      if (!opt_delta_w.empty()) overrides.push_back("mission.delta_w = " + opt_delta_w);
      if (!opt_delta_o.empty()) overrides.push_back("mission.delta_o = " + opt_delta_o);
      if (!opt_horizon.empty()) overrides.push_back("mission.T = " + opt_horizon);
      if (!opt_seed.empty()) overrides.push_back("solver.seed = " + opt_seed);
      if (!opt_multistarts.empty()) {
        overrides.push_back("solver.multistarts = " + opt_multistarts);
      }
      return run_plan(plan_mission, plan_out, overrides);
    }
    if (app.got_subcommand(validate)) {
      return run_validate(val_mission, val_plan, val_samples, val_seed, val_out);
    }
    if (app.got_subcommand(exp)) return run_export(exp_plan, exp_what, exp_out);
  } catch (const ucover::FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
