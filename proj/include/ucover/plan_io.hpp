#pragma once
// Plan and validation-report files. Plans are self-contained: besides the
// control sequence they carry the camera geometry, the covered waypoints,
// and the full mesh, so the export command needs nothing but the plan.
// All numbers are written with %.17g; files carry no timing information, so
// a rerun with identical inputs is byte-identical.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ucover/dynamics.hpp"
#include "ucover/geometry.hpp"
#include "ucover/math.hpp"
#include "ucover/mission.hpp"
#include "ucover/mission_io.hpp"
#include "ucover/solver.hpp"
#include "ucover/validation.hpp"

namespace ucover {

struct PlanStepRecord {
  int t = 0;  // physical step index, 1..T; control is the input applied at t-1
  ControlInput control;
  Vector5d mean = Vector5d::Zero();
  Eigen::Matrix3d pos_cov = Eigen::Matrix3d::Zero();
  int fov_index = 0;
};

struct PlanWaypointRecord {
  int index = 0;
  int visit_step = 0;  // physical step
  int facet_index = 0;
  bool covered = false;
};

struct PlanFovRecord {
  double psi_y = 0.0;
  double psi_z = 0.0;
  Eigen::Matrix<double, 3, 5> vertices = Eigen::Matrix<double, 3, 5>::Zero();
};

struct PlanMeshFacet {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  bool covered = false;
};

struct PlanFile {
  std::string mission_hash;
  std::uint64_t seed = 1;
  int multistarts = 1;
  std::string status;
  double objective = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  int start_index = 0;
  int horizon = 0;
  std::vector<std::string> overrides;  // raw "section.key = value" lines
  Vector5d state0 = Vector5d::Zero();
  std::vector<PlanStepRecord> steps;
  std::vector<PlanWaypointRecord> waypoints;
  std::vector<PlanFovRecord> fov_states;
  std::vector<PlanMeshFacet> mesh;
  Eigen::Vector3d goal = Eigen::Vector3d::Zero();
};

inline PlanFile make_plan_file(const MissionSpec& spec, const std::string& mission_hash,
                               const std::vector<Facet>& full_mesh,
                               const PlanResult& result, const SolveReport& report,
                               std::uint64_t seed, int multistarts,
                               const std::vector<std::string>& overrides) {
  PlanFile pf;
  pf.mission_hash = mission_hash;
  pf.seed = seed;
  pf.multistarts = multistarts;
  pf.status = to_string(report.status);
  pf.objective = report.objective;
  pf.max_violation = report.max_violation;
  pf.iterations = report.iterations;
  pf.start_index = report.start_index;
  pf.horizon = spec.horizon;
  pf.overrides = overrides;
  pf.state0 = spec.initial_belief.mean;
  for (int t = 1; t <= spec.horizon; ++t) {
    PlanStepRecord rec;
    rec.t = t;
    rec.control = result.controls[static_cast<std::size_t>(t - 1)];
    const GaussianBelief& b = result.beliefs[static_cast<std::size_t>(t)];
    rec.mean = b.mean;
    rec.pos_cov = b.position_cov();
    rec.fov_index = result.fov_schedule[static_cast<std::size_t>(t - 1)];
    pf.steps.push_back(rec);
  }
  for (int n = 0; n < spec.waypoint_count(); ++n) {
    PlanWaypointRecord rec;
    rec.index = n;
    rec.visit_step = result.visit_step[static_cast<std::size_t>(n)];
    rec.facet_index = spec.waypoints[static_cast<std::size_t>(n)].facet_index;
    rec.covered = result.covered[static_cast<std::size_t>(n)] != 0;
    pf.waypoints.push_back(rec);
  }
  for (const auto& s : spec.fov_states) {
    PlanFovRecord rec;
    rec.psi_y = s.psi_y;
    rec.psi_z = s.psi_z;
    rec.vertices = s.vertices_body;
    pf.fov_states.push_back(rec);
  }
  for (int k = 0; k < static_cast<int>(full_mesh.size()); ++k) {
    const Facet& f = full_mesh[static_cast<std::size_t>(k)];
    PlanMeshFacet mf;
    mf.a = f.vertices[0];
    mf.b = f.vertices[1];
    mf.c = f.vertices[2];
    for (const auto& w : pf.waypoints) {
      if (w.facet_index == k && w.covered) mf.covered = true;
    }
    pf.mesh.push_back(mf);
  }
  pf.goal = spec.goal_centroid;
  return pf;
}

inline void write_plan_file(const std::filesystem::path& path, const PlanFile& pf) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "# coverage plan\n";
  os << "plan.mission_hash = " << pf.mission_hash << "\n";
  os << "plan.seed = " << pf.seed << "\n";
  os << "plan.multistarts = " << pf.multistarts << "\n";
  os << "plan.status = " << pf.status << "\n";
  os << "plan.objective = " << f(pf.objective) << "\n";
  os << "plan.max_violation = " << f(pf.max_violation) << "\n";
  os << "plan.iterations = " << pf.iterations << "\n";
  os << "plan.start_index = " << pf.start_index << "\n";
  os << "plan.T = " << pf.horizon << "\n";
  for (const auto& ov : pf.overrides) os << "plan.override = " << ov << "\n";
  os << "plan.state0 = ";
  for (int i = 0; i < 5; ++i) os << (i ? "," : "") << f(pf.state0[i]);
  os << "\n";
  os << "goal = " << f(pf.goal[0]) << ',' << f(pf.goal[1]) << ',' << f(pf.goal[2]) << "\n";
  for (const auto& s : pf.steps) {
    os << "step = " << s.t << ',' << f(s.control.v) << ',' << f(s.control.w_theta) << ','
       << f(s.control.w_phi);
    for (int i = 0; i < 5; ++i) os << ',' << f(s.mean[i]);
    os << ',' << f(s.pos_cov(0, 0)) << ',' << f(s.pos_cov(0, 1)) << ',' << f(s.pos_cov(0, 2))
       << ',' << f(s.pos_cov(1, 1)) << ',' << f(s.pos_cov(1, 2)) << ',' << f(s.pos_cov(2, 2))
       << ',' << s.fov_index << "\n";
  }
  for (const auto& w : pf.waypoints) {
    os << "waypoint = " << w.index << ',' << w.visit_step << ',' << w.facet_index << ','
       << (w.covered ? 1 : 0) << "\n";
  }
  for (int m = 0; m < static_cast<int>(pf.fov_states.size()); ++m) {
    const auto& s = pf.fov_states[static_cast<std::size_t>(m)];
    os << "fov_state = " << m << ',' << f(s.psi_y) << ',' << f(s.psi_z) << "\n";
    for (int i = 0; i < 5; ++i) {
      os << "fov_vertex = " << m << ',' << i << ',' << f(s.vertices(0, i)) << ','
         << f(s.vertices(1, i)) << ',' << f(s.vertices(2, i)) << "\n";
    }
  }
  for (int k = 0; k < static_cast<int>(pf.mesh.size()); ++k) {
    const auto& mfc = pf.mesh[static_cast<std::size_t>(k)];
    os << "mesh_facet = " << k;
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.a[i]);
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.b[i]);
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.c[i]);
    os << ',' << (mfc.covered ? 1 : 0) << "\n";
  }
  detail::write_text(path, os.str());
}

inline PlanFile parse_plan_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open plan file: " + path.string());
  PlanFile pf;
  bool have_t = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = ioutil::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FileError("plan file " + path.string() + ":" + std::to_string(lineno) +
                      ": expected 'key = value'");
    }
    const std::string key = ioutil::trim(t.substr(0, eq));
    const std::string value = ioutil::trim(t.substr(eq + 1));
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (key == "plan.mission_hash") {
      pf.mission_hash = value;
    } else if (key == "plan.seed") {
      pf.seed = static_cast<std::uint64_t>(ioutil::parse_int(value, key));
    } else if (key == "plan.multistarts") {
      pf.multistarts = static_cast<int>(ioutil::parse_int(value, key));
    } else if (key == "plan.status") {
      pf.status = value;
    } else if (key == "plan.objective") {
      pf.objective = ioutil::parse_double(value, key);
    } else if (key == "plan.max_violation") {
      pf.max_violation = ioutil::parse_double(value, key);
    } else if (key == "plan.iterations") {
      pf.iterations = static_cast<int>(ioutil::parse_int(value, key));
    } else if (key == "plan.start_index") {
      pf.start_index = static_cast<int>(ioutil::parse_int(value, key));
    } else if (key == "plan.T") {
      pf.horizon = static_cast<int>(ioutil::parse_int(value, key));
      have_t = true;
    } else if (key == "plan.override") {
      if (value.find('=') == std::string::npos) {
        throw FileError(where + ": override needs 'section.key = value'");
      }
      pf.overrides.push_back(value);
    } else if (key == "plan.state0") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 5) throw FileError(where + ": state0 needs 5 numbers");
      for (int i = 0; i < 5; ++i) pf.state0[i] = v[static_cast<std::size_t>(i)];
    } else if (key == "goal") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 3) throw FileError(where + ": goal needs 3 numbers");
      pf.goal = Eigen::Vector3d(v[0], v[1], v[2]);
    } else if (key == "step") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 16) throw FileError(where + ": step needs 16 numbers");
      PlanStepRecord rec;
      rec.t = static_cast<int>(v[0]);
      rec.control = {v[1], v[2], v[3]};
      for (int i = 0; i < 5; ++i) rec.mean[i] = v[static_cast<std::size_t>(4 + i)];
      rec.pos_cov(0, 0) = v[9];
      rec.pos_cov(0, 1) = rec.pos_cov(1, 0) = v[10];
      rec.pos_cov(0, 2) = rec.pos_cov(2, 0) = v[11];
      rec.pos_cov(1, 1) = v[12];
      rec.pos_cov(1, 2) = rec.pos_cov(2, 1) = v[13];
      rec.pos_cov(2, 2) = v[14];
      rec.fov_index = static_cast<int>(v[15]);
      pf.steps.push_back(rec);
    } else if (key == "waypoint") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 4) throw FileError(where + ": waypoint needs 4 numbers");
      pf.waypoints.push_back({static_cast<int>(v[0]), static_cast<int>(v[1]),
                              static_cast<int>(v[2]), v[3] != 0.0});
    } else if (key == "fov_state") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 3) throw FileError(where + ": fov_state needs 3 numbers");
      if (static_cast<int>(v[0]) != static_cast<int>(pf.fov_states.size())) {
        throw FileError(where + ": fov_state lines must be in index order");
      }
      PlanFovRecord rec;
      rec.psi_y = v[1];
      rec.psi_z = v[2];
      pf.fov_states.push_back(rec);
    } else if (key == "fov_vertex") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 5) throw FileError(where + ": fov_vertex needs 5 numbers");
      const int m = static_cast<int>(v[0]);
      const int i = static_cast<int>(v[1]);
      if (m < 0 || m >= static_cast<int>(pf.fov_states.size()) || i < 0 || i >= 5) {
        throw FileError(where + ": fov_vertex index out of range");
      }
      for (int r = 0; r < 3; ++r) {
        pf.fov_states[static_cast<std::size_t>(m)].vertices(r, i) =
            v[static_cast<std::size_t>(2 + r)];
      }
    } else if (key == "mesh_facet") {
      const auto v = ioutil::parse_list(value, key);
      if (v.size() != 11) throw FileError(where + ": mesh_facet needs 11 numbers");
      PlanMeshFacet mfc;
      for (int i = 0; i < 3; ++i) mfc.a[i] = v[static_cast<std::size_t>(1 + i)];
      for (int i = 0; i < 3; ++i) mfc.b[i] = v[static_cast<std::size_t>(4 + i)];
      for (int i = 0; i < 3; ++i) mfc.c[i] = v[static_cast<std::size_t>(7 + i)];
      mfc.covered = v[10] != 0.0;
      pf.mesh.push_back(mfc);
    } else {
      throw FileError(where + ": unknown plan key '" + key + "'");
    }
  }
  if (!have_t || static_cast<int>(pf.steps.size()) != pf.horizon) {
    throw FileError("plan file " + path.string() + ": step count does not match plan.T");
  }
  for (int t = 1; t <= pf.horizon; ++t) {
    if (pf.steps[static_cast<std::size_t>(t - 1)].t != t) {
      throw FileError("plan file " + path.string() + ": step lines must run 1..T in order");
    }
  }
  if (pf.waypoints.empty()) throw FileError("plan file has no waypoint lines");
  if (pf.fov_states.empty()) throw FileError("plan file has no fov_state lines");
  return pf;
}

// Rebuilds the solver output from a plan file. Belief moments are recomputed
// from the controls, so a written-then-reread plan validates identically.
inline PlanResult plan_result_from_file(const MissionSpec& spec, const PlanFile& pf) {
  if (pf.horizon != spec.horizon) {
    throw FileError("plan horizon does not match mission horizon");
  }
  if (static_cast<int>(pf.waypoints.size()) != spec.waypoint_count()) {
    throw FileError("plan waypoint count does not match mission");
  }
  if (static_cast<int>(pf.fov_states.size()) != spec.fov_count()) {
    throw FileError("plan camera state count does not match mission");
  }
  PlanResult result;
  for (const auto& s : pf.steps) {
    result.controls.push_back(s.control);
    result.fov_schedule.push_back(s.fov_index);
    if (s.fov_index < 0 || s.fov_index >= spec.fov_count()) {
      throw FileError("plan camera index out of range");
    }
  }
  for (const auto& w : pf.waypoints) {
    if (w.visit_step < 1 || w.visit_step > pf.horizon) {
      throw FileError("plan visit step out of range");
    }
    result.visit_step.push_back(w.visit_step);
    result.covered.push_back(w.covered ? 1 : 0);
  }
  result.beliefs = belief_trajectory(spec, result.controls);
  result.objective = pf.objective;
  return result;
}

// ---------------------------------------------------------------------------
// Validation report file.

struct ValidationChecks {
  bool waypoint_pass = false;
  bool obstacle_pass = false;
};

// Pass iff every per-face waypoint rate is within delta_w + half-width and
// every per-step collision rate is within delta_o + half-width. The margins
// are constructed per face, so the joint miss rate is reported but not gated.
inline ValidationChecks evaluate_checks(const MissionSpec& spec,
                                        const ValidationReport& report) {
  ValidationChecks checks;
  checks.waypoint_pass = true;
  for (const auto& faces : report.waypoint_face_rates) {
    for (double rate : faces) {
      if (rate > spec.delta_w + report.half_width) checks.waypoint_pass = false;
    }
  }
  checks.obstacle_pass = true;
  for (const auto& per_step : report.obstacle_collision_rates) {
    for (double rate : per_step) {
      if (rate > spec.delta_o + report.half_width) checks.obstacle_pass = false;
    }
  }
  return checks;
}

inline void write_validation_report(const std::filesystem::path& path,
                                    const std::string& mission_hash,
                                    const ValidationReport& report,
                                    const ValidationChecks& checks) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "# validation report\n";
  os << "report.mission_hash = " << mission_hash << "\n";
  os << "report.seed = " << report.seed << "\n";
  os << "report.samples = " << report.sample_count << "\n";
  os << "report.half_width = " << f(report.half_width) << "\n";
  for (int n = 0; n < static_cast<int>(report.waypoint_face_rates.size()); ++n) {
    const auto& faces = report.waypoint_face_rates[static_cast<std::size_t>(n)];
    for (int l = 0; l < static_cast<int>(faces.size()); ++l) {
      os << "waypoint_face_rate = " << n << ',' << l << ','
         << f(faces[static_cast<std::size_t>(l)]) << "\n";
    }
  }
  for (int n = 0; n < static_cast<int>(report.waypoint_joint_miss.size()); ++n) {
    os << "waypoint_joint_miss = " << n << ','
       << f(report.waypoint_joint_miss[static_cast<std::size_t>(n)]) << "\n";
  }
  for (int xi = 0; xi < static_cast<int>(report.obstacle_collision_rates.size()); ++xi) {
    const auto& per_step = report.obstacle_collision_rates[static_cast<std::size_t>(xi)];
    for (int t = 1; t <= static_cast<int>(per_step.size()); ++t) {
      os << "obstacle_collision = " << xi << ',' << t << ','
         << f(per_step[static_cast<std::size_t>(t - 1)]) << "\n";
    }
  }
  for (int t = 0; t < static_cast<int>(report.mean_divergence.size()); ++t) {
    os << "mean_divergence = " << t << ','
       << f(report.mean_divergence[static_cast<std::size_t>(t)]) << "\n";
  }
  for (int t = 0; t < static_cast<int>(report.cov_divergence.size()); ++t) {
    os << "cov_divergence = " << t << ','
       << f(report.cov_divergence[static_cast<std::size_t>(t)]) << "\n";
  }
  for (int n = 0; n < static_cast<int>(report.facet_coverage_rates.size()); ++n) {
    os << "coverage_rate = " << n << ','
       << f(report.facet_coverage_rates[static_cast<std::size_t>(n)]) << "\n";
  }
  os << "full_coverage = " << f(report.full_coverage_fraction) << "\n";
  os << "checks.waypoint = " << (checks.waypoint_pass ? "pass" : "fail") << "\n";
  os << "checks.obstacle = " << (checks.obstacle_pass ? "pass" : "fail") << "\n";
  detail::write_text(path, os.str());
}

// ---------------------------------------------------------------------------
// Exports. Each writes one CSV into the output directory from the plan alone.

inline void export_trajectory(const PlanFile& pf, const std::filesystem::path& dir) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "t,x,y,z\n";
  os << "0," << f(pf.state0[0]) << ',' << f(pf.state0[1]) << ',' << f(pf.state0[2]) << "\n";
  for (const auto& s : pf.steps) {
    os << s.t << ',' << f(s.mean[0]) << ',' << f(s.mean[1]) << ',' << f(s.mean[2]) << "\n";
  }
  detail::write_text(dir / "trajectory.csv", os.str());
}

// 99.9% position uncertainty ellipsoids: semi-axis i has length
// sqrt(q * lambda_i) with q the 3-dof chi-square quantile; columns u,v,w are
// the corresponding unit axes.
inline void export_ellipsoids(const PlanFile& pf, const std::filesystem::path& dir) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "t,cx,cy,cz,r1,r2,r3,ux,uy,uz,vx,vy,vz,wx,wy,wz\n";
  for (const auto& s : pf.steps) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(s.pos_cov);
    if (eig.info() != Eigen::Success) {
      throw FileError("ellipsoid eigendecomposition failed at step " + std::to_string(s.t));
    }
    os << s.t << ',' << f(s.mean[0]) << ',' << f(s.mean[1]) << ',' << f(s.mean[2]);
    for (int i = 0; i < 3; ++i) {
      os << ',' << f(std::sqrt(kChi3Quantile999 * std::max(0.0, eig.eigenvalues()[i])));
    }
    for (int i = 0; i < 3; ++i) {
      for (int r = 0; r < 3; ++r) os << ',' << f(eig.eigenvectors()(r, i));
    }
    os << "\n";
  }
  detail::write_text(dir / "ellipsoids.csv", os.str());
}

// Active field-of-view pyramid per step, translated to the mean position.
inline void export_fov(const PlanFile& pf, const std::filesystem::path& dir) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "t,fov_index,vertex,x,y,z\n";
  for (const auto& s : pf.steps) {
    if (s.fov_index < 0 || s.fov_index >= static_cast<int>(pf.fov_states.size())) {
      throw FileError("plan camera index out of range at step " + std::to_string(s.t));
    }
    const auto& verts = pf.fov_states[static_cast<std::size_t>(s.fov_index)].vertices;
    for (int i = 0; i < 5; ++i) {
      os << s.t << ',' << s.fov_index << ',' << i << ',' << f(verts(0, i) + s.mean[0]) << ','
         << f(verts(1, i) + s.mean[1]) << ',' << f(verts(2, i) + s.mean[2]) << "\n";
    }
  }
  detail::write_text(dir / "fov.csv", os.str());
}

inline void export_mesh(const PlanFile& pf, const std::filesystem::path& dir) {
  std::ostringstream os;
  const auto f = [](double v) { return ioutil::fmt(v); };
  os << "facet,ax,ay,az,bx,by,bz,cx,cy,cz,covered\n";
  for (int k = 0; k < static_cast<int>(pf.mesh.size()); ++k) {
    const auto& mfc = pf.mesh[static_cast<std::size_t>(k)];
    os << k;
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.a[i]);
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.b[i]);
    for (int i = 0; i < 3; ++i) os << ',' << f(mfc.c[i]);
    os << ',' << (mfc.covered ? 1 : 0) << "\n";
  }
  detail::write_text(dir / "mesh.csv", os.str());
}

// Applies a raw "section.key = value" override to a parsed mission file.
inline void apply_override_line(MissionFile& mf, const std::string& raw) {
  const auto eq = raw.find('=');
  if (eq == std::string::npos) {
    throw FileError("override needs 'section.key = value': " + raw);
  }
  const std::string key = ioutil::trim(raw.substr(0, eq));
  const std::string value = ioutil::trim(raw.substr(eq + 1));
  if (key.empty() || value.empty()) {
    throw FileError("override needs 'section.key = value': " + raw);
  }
  mf.set(key, value);
}

}  // namespace ucover
