#pragma once
// Mission file ingestion and fixture generation. The mission format is a
// line-oriented "section.key = value" text file; lists are comma-separated,
// angles are stored in degrees and converted to radians exactly once here.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucover/delaunay.hpp"
#include "ucover/geometry.hpp"
#include "ucover/math.hpp"
#include "ucover/mission.hpp"
#include "ucover/solver.hpp"

namespace ucover {

// I/O and parse failures; the CLI maps these to exit code 2.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace ioutil {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw FileError("invalid number for " + what + ": '" + s + "'");
}

inline long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw FileError("invalid integer for " + what + ": '" + s + "'");
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) throw FileError("empty element in list for " + what);
    out.push_back(parse_double(tok, what));
  }
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ioutil

// Raw key-value view of a mission file. Overrides are applied here, before
// resolution, so a re-resolved mission reflects them in its content hash.
struct MissionFile {
  std::filesystem::path path;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const std::string& require(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
      throw FileError("mission file missing key '" + key + "' (" + path.string() + ")");
    }
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
  void set(const std::string& key, const std::string& value) { values[key] = value; }
};

inline MissionFile parse_mission_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open mission file: " + path.string());
  MissionFile mf;
  mf.path = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = ioutil::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FileError("mission file " + path.string() + ":" + std::to_string(lineno) +
                      ": expected 'section.key = value'");
    }
    const std::string key = ioutil::trim(t.substr(0, eq));
    const std::string value = ioutil::trim(t.substr(eq + 1));
    if (key.empty()) {
      throw FileError("mission file " + path.string() + ":" + std::to_string(lineno) +
                      ": empty key");
    }
    mf.values[key] = value;
  }
  return mf;
}

// Mesh files: format "points" holds one x,y,z vertex per line and is
// triangulated here; format "triangles" holds 9 numbers per line (three
// vertices) taken as facets in file order.
inline std::vector<Facet> load_mesh(const std::filesystem::path& path,
                                    const std::string& format) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open mesh file: " + path.string());
  std::vector<Facet> facets;
  std::vector<Eigen::Vector3d> points;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = ioutil::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto nums = ioutil::parse_list(t, "mesh line " + std::to_string(lineno));
    if (format == "points") {
      if (nums.size() != 3) {
        throw FileError("mesh file " + path.string() + ":" + std::to_string(lineno) +
                        ": expected x,y,z");
      }
      points.emplace_back(nums[0], nums[1], nums[2]);
    } else if (format == "triangles") {
      if (nums.size() != 9) {
        throw FileError("mesh file " + path.string() + ":" + std::to_string(lineno) +
                        ": expected 9 numbers");
      }
      facets.push_back(Facet::from_vertices(Eigen::Vector3d(nums[0], nums[1], nums[2]),
                                            Eigen::Vector3d(nums[3], nums[4], nums[5]),
                                            Eigen::Vector3d(nums[6], nums[7], nums[8])));
    } else {
      throw FileError("unknown mesh format '" + format + "'");
    }
  }
  if (format == "points") {
    if (points.size() < 3) {
      throw FileError("mesh file has too few points to triangulate: " + path.string());
    }
    facets = delaunay_2p5d(points);
  }
  if (facets.empty()) throw FileError("mesh file has no facets: " + path.string());
  return facets;
}

inline std::vector<int> load_subset(const std::filesystem::path& path, int facet_count) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open facet subset file: " + path.string());
  std::vector<int> subset;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = ioutil::trim(line);
    if (t.empty() || t[0] == '#') continue;
    for (const auto& tok : ioutil::split(t, ',')) {
      if (tok.empty()) continue;
      const long idx = ioutil::parse_int(tok, "facet subset");
      if (idx < 0 || idx >= facet_count) {
        throw FileError("facet subset index out of range: " + tok);
      }
      subset.push_back(static_cast<int>(idx));
    }
  }
  if (subset.empty()) throw FileError("facet subset file is empty: " + path.string());
  return subset;
}

struct ResolvedMission {
  MissionSpec spec;
  SolverConfig solver;
  std::vector<Facet> full_mesh;  // everything loaded, spec holds the subset
  std::string content_hash;      // over the resolved spec, not the file text
};

namespace detail {

inline std::string hash_spec(const MissionSpec& spec) {
  std::ostringstream os;
  const auto put = [&os](double v) { os << ioutil::fmt(v) << ';'; };
  put(spec.dt);
  os << spec.horizon << ';';
  put(spec.delta_w);
  put(spec.delta_o);
  put(spec.control_bounds.v_max);
  put(spec.control_bounds.omega_max);
  for (int i = 0; i < 3; ++i) put(spec.goal_centroid[i]);
  for (int i = 0; i < 3; ++i) put(spec.env_min[i]);
  for (int i = 0; i < 3; ++i) put(spec.env_max[i]);
  os << (spec.cover_vertices ? 1 : 0) << ';';
  for (int i = 0; i < 5; ++i) put(spec.initial_belief.mean[i]);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) put(spec.initial_belief.covariance(i, j));
  }
  for (int i = 0; i < 3; ++i) put(spec.disturbance.mean[i]);
  for (int i = 0; i < 3; ++i) put(spec.disturbance.q_diag[i]);
  put(spec.ut_config.alpha);
  put(spec.ut_config.rho);
  put(spec.ut_config.beta);
  for (const auto& f : spec.facets_to_cover) {
    for (const auto& v : f.vertices) {
      for (int i = 0; i < 3; ++i) put(v[i]);
    }
  }
  for (const auto& w : spec.waypoints) {
    os << w.facet_index << ';';
    put(w.edge_length);
    for (int i = 0; i < 3; ++i) put(w.center[i]);
  }
  for (const auto& s : spec.fov_states) {
    put(s.psi_y);
    put(s.psi_z);
  }
  put(spec.camera_config.h_fov);
  put(spec.camera_config.phi_h);
  put(spec.camera_config.phi_v);
  for (const auto& obs : spec.obstacles) {
    for (const auto& f : obs.faces) {
      for (int i = 0; i < 3; ++i) put(f.normal[i]);
      put(f.offset);
    }
  }
  return ioutil::hex16(ioutil::fnv1a64(os.str()));
}

}  // namespace detail

inline ResolvedMission resolve_mission(const MissionFile& mf) {
  ResolvedMission rm;
  MissionSpec& spec = rm.spec;
  const auto deg = [](double d) { return d * kPi / 180.0; };

  spec.dt = ioutil::parse_double(mf.require("dynamics.dt"), "dynamics.dt");
  spec.control_bounds.v_max =
      ioutil::parse_double(mf.require("dynamics.v_max"), "dynamics.v_max");
  spec.control_bounds.omega_max =
      ioutil::parse_double(mf.require("dynamics.omega_max"), "dynamics.omega_max");
  {
    const auto q = ioutil::parse_list(mf.require("dynamics.q_diag"), "dynamics.q_diag");
    if (q.size() != 3) throw FileError("dynamics.q_diag needs 3 entries");
    spec.disturbance.q_diag = Eigen::Vector3d(q[0], q[1], q[2]);
    const auto nm = ioutil::parse_list(mf.get_or("dynamics.noise_mean", "0,0,0"),
                                       "dynamics.noise_mean");
    if (nm.size() != 3) throw FileError("dynamics.noise_mean needs 3 entries");
    spec.disturbance.mean = Eigen::Vector3d(nm[0], nm[1], nm[2]);
    const auto x0 = ioutil::parse_list(mf.require("dynamics.x0_mean"), "dynamics.x0_mean");
    const auto p0 =
        ioutil::parse_list(mf.require("dynamics.x0_cov_diag"), "dynamics.x0_cov_diag");
    if (x0.size() != 5 || p0.size() != 5) {
      throw FileError("dynamics.x0_mean and x0_cov_diag need 5 entries");
    }
    spec.initial_belief.mean = Eigen::Map<const Eigen::VectorXd>(x0.data(), 5);
    spec.initial_belief.covariance =
        Eigen::Map<const Eigen::VectorXd>(p0.data(), 5).asDiagonal();
  }

  CameraConfig& cam = spec.camera_config;
  cam.h_fov = ioutil::parse_double(mf.require("camera.h_fov"), "camera.h_fov");
  cam.phi_h = deg(ioutil::parse_double(mf.require("camera.phi_h_deg"), "camera.phi_h_deg"));
  cam.phi_v = deg(ioutil::parse_double(mf.require("camera.phi_v_deg"), "camera.phi_v_deg"));
  for (double d : ioutil::parse_list(mf.require("camera.psi_y_deg"), "camera.psi_y_deg")) {
    cam.psi_y.push_back(deg(d));
  }
  for (double d : ioutil::parse_list(mf.require("camera.psi_z_deg"), "camera.psi_z_deg")) {
    cam.psi_z.push_back(deg(d));
  }
  cam.validate();
  spec.fov_states = enumerate_fov_states(cam);

  spec.ut_config.alpha = ioutil::parse_double(mf.get_or("ut.alpha", "1"), "ut.alpha");
  spec.ut_config.rho = ioutil::parse_double(mf.get_or("ut.rho", "2.5"), "ut.rho");
  spec.ut_config.beta = ioutil::parse_double(mf.get_or("ut.beta", "2"), "ut.beta");

  spec.horizon = static_cast<int>(ioutil::parse_int(mf.require("mission.T"), "mission.T"));
  spec.delta_w = ioutil::parse_double(mf.require("mission.delta_w"), "mission.delta_w");
  spec.delta_o = ioutil::parse_double(mf.require("mission.delta_o"), "mission.delta_o");
  const double standoff =
      ioutil::parse_double(mf.require("mission.c"), "mission.c");
  const double edge =
      ioutil::parse_double(mf.require("mission.waypoint_edge"), "mission.waypoint_edge");
  {
    const auto goal = ioutil::parse_list(mf.require("mission.goal"), "mission.goal");
    const auto emin = ioutil::parse_list(mf.require("mission.env_min"), "mission.env_min");
    const auto emax = ioutil::parse_list(mf.require("mission.env_max"), "mission.env_max");
    if (goal.size() != 3 || emin.size() != 3 || emax.size() != 3) {
      throw FileError("mission.goal/env_min/env_max need 3 entries");
    }
    spec.goal_centroid = Eigen::Vector3d(goal[0], goal[1], goal[2]);
    spec.env_min = Eigen::Vector3d(emin[0], emin[1], emin[2]);
    spec.env_max = Eigen::Vector3d(emax[0], emax[1], emax[2]);
  }
  {
    const std::string cv = mf.get_or("mission.cover_vertices", "false");
    if (cv == "true") {
      spec.cover_vertices = true;
    } else if (cv == "false") {
      spec.cover_vertices = false;
    } else {
      throw FileError("mission.cover_vertices must be true or false");
    }
  }

  const std::filesystem::path dir = mf.path.parent_path();
  rm.full_mesh = load_mesh(dir / mf.require("mesh.source"), mf.require("mesh.format"));
  std::vector<int> subset;
  if (mf.has("mesh.facet_subset")) {
    subset = load_subset(dir / mf.require("mesh.facet_subset"),
                         static_cast<int>(rm.full_mesh.size()));
  } else {
    for (int i = 0; i < static_cast<int>(rm.full_mesh.size()); ++i) subset.push_back(i);
  }
  for (int idx : subset) {
    const Facet& f = rm.full_mesh[static_cast<std::size_t>(idx)];
    spec.facets_to_cover.push_back(f);
    spec.waypoints.push_back(make_waypoint(f, idx, standoff, cam.h_fov, edge));
  }

  const int obs_count =
      static_cast<int>(ioutil::parse_int(mf.get_or("obstacles.count", "0"), "obstacles.count"));
  for (int k = 0; k < obs_count; ++k) {
    const std::string box_key = "obstacles.box" + std::to_string(k);
    const std::string poly_key = "obstacles.poly" + std::to_string(k);
    if (mf.has(box_key)) {
      const auto b = ioutil::parse_list(mf.require(box_key), box_key);
      if (b.size() != 6) throw FileError(box_key + " needs min,max corners (6 numbers)");
      spec.obstacles.push_back(make_box(Eigen::Vector3d(b[0], b[1], b[2]),
                                        Eigen::Vector3d(b[3], b[4], b[5])));
    } else if (mf.has(poly_key)) {
      ConvexPolytope poly;
      for (const auto& part : ioutil::split(mf.require(poly_key), ';')) {
        const auto f = ioutil::parse_list(part, poly_key);
        if (f.size() != 4) throw FileError(poly_key + " faces need nx,ny,nz,b");
        const Eigen::Vector3d nrm(f[0], f[1], f[2]);
        if (nrm.norm() < 1e-12) throw FileError(poly_key + " has a zero normal");
        poly.faces.push_back({nrm / nrm.norm(), f[3] / nrm.norm()});
      }
      spec.obstacles.push_back(std::move(poly));
    } else {
      throw FileError("missing obstacle " + std::to_string(k) +
                      " (expected obstacles.box" + std::to_string(k) + " or .poly" +
                      std::to_string(k) + ")");
    }
  }

  SolverConfig& sc = rm.solver;
  sc.rng_seed = static_cast<std::uint64_t>(
      ioutil::parse_int(mf.get_or("solver.seed", "1"), "solver.seed"));
  sc.multistart_count = static_cast<int>(
      ioutil::parse_int(mf.get_or("solver.multistarts", "4"), "solver.multistarts"));
  sc.max_outer_iters = static_cast<int>(
      ioutil::parse_int(mf.get_or("solver.max_outer", "40"), "solver.max_outer"));
  sc.max_inner_iters = static_cast<int>(
      ioutil::parse_int(mf.get_or("solver.max_inner", "300"), "solver.max_inner"));
  sc.constraint_tol = ioutil::parse_double(
      mf.get_or("solver.constraint_tol", "0.0001"), "solver.constraint_tol");
  sc.optimality_tol = ioutil::parse_double(
      mf.get_or("solver.optimality_tol", "0.00001"), "solver.optimality_tol");
  sc.validate();

  spec.validate();
  rm.content_hash = detail::hash_spec(spec);
  return rm;
}

// ---------------------------------------------------------------------------
// Fixtures.

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FileError("cannot write file: " + path.string());
  out << text;
  if (!out) throw FileError("write failed: " + path.string());
}

// Reference surface of the benchmark object.
inline double surface_height(double x, double y) {
  return 40.0 * std::exp(-((x - 45.0) * (x - 45.0) / 160.0 +
                           (y - 45.0) * (y - 45.0) / 160.0));
}

// 14x14 vertex grid over [25,65]^2 sampled from the surface; triangulates to
// exactly 338 facets.
inline std::string benchmark_mesh_csv() {
  std::ostringstream os;
  os << "# benchmark surface samples (x,y,z per line)\n";
  for (int i = 0; i < 14; ++i) {
    for (int j = 0; j < 14; ++j) {
      const double x = 25.0 + 40.0 * i / 13.0;
      const double y = 25.0 + 40.0 * j / 13.0;
      os << ioutil::fmt(x) << ',' << ioutil::fmt(y) << ','
         << ioutil::fmt(surface_height(x, y)) << '\n';
    }
  }
  return os.str();
}

// Stack of axis-aligned boxes inscribed under the surface: for half-width a
// the surface minimum over [45-a,45+a]^2 sits at the corners, so a box of
// that corner height fits underneath. Used as the convex collision stand-in
// for the object itself.
inline std::string benchmark_obstacle_lines() {
  std::ostringstream os;
  const double half_widths[] = {14.0, 10.0, 6.0, 3.0};
  os << "obstacles.count = 4\n";
  for (int k = 0; k < 4; ++k) {
    const double a = half_widths[k];
    const double h = 40.0 * std::exp(-2.0 * a * a / 160.0);
    os << "obstacles.box" << k << " = " << ioutil::fmt(45.0 - a) << ','
       << ioutil::fmt(45.0 - a) << ",0," << ioutil::fmt(45.0 + a) << ','
       << ioutil::fmt(45.0 + a) << ',' << ioutil::fmt(h) << '\n';
  }
  return os.str();
}

inline std::string benchmark_mission_text(int horizon, const std::string& mesh_name,
                                          const std::string& subset_name) {
  std::ostringstream os;
  os << "# benchmark coverage mission\n"
     << "dynamics.dt = 0.1\n"
     << "dynamics.v_max = 12\n"
     << "dynamics.omega_max = " << ioutil::fmt(kPi / 3.0) << "\n"
     << "dynamics.q_diag = 0.001,0.001,0.001\n"
     << "dynamics.noise_mean = 0,0,0\n"
     << "dynamics.x0_mean = 10,10,10,0,0\n"
     << "dynamics.x0_cov_diag = 0.0001,0.0001,0.0001,0.0001,0.0001\n"
     << "camera.h_fov = 15\n"
     << "camera.phi_h_deg = 60\n"
     << "camera.phi_v_deg = 60\n"
     << "camera.psi_y_deg = -90,-45,0,45,90\n"
     << "camera.psi_z_deg = -135,-90,-45,0,45,90,135,180\n"
     << "ut.alpha = 1\n"
     << "ut.rho = 2.5\n"
     << "ut.beta = 2\n"
     << "mission.T = " << horizon << "\n"
     << "mission.delta_w = 0.4\n"
     << "mission.delta_o = 0.3\n"
     << "mission.c = 0.8\n"
     << "mission.waypoint_edge = 5\n"
     << "mission.goal = 45.5,6,5\n"
     << "mission.env_min = 0,0,0\n"
     << "mission.env_max = 100,100,100\n"
     << "mission.cover_vertices = false\n"
     << "mesh.source = " << mesh_name << "\n"
     << "mesh.format = points\n"
     << "mesh.facet_subset = " << subset_name << "\n"
     << benchmark_obstacle_lines()
     << "solver.seed = 1\n"
     << "solver.multistarts = 4\n";
  return os.str();
}

}  // namespace detail

// Writes the mission file plus its mesh/subset companions next to it.
// Returns the mission path.
inline std::filesystem::path write_fixture(const std::string& name,
                                           const std::filesystem::path& out) {
  const std::string mesh_name = out.filename().string() + ".mesh.csv";
  const std::string subset_name = out.filename().string() + ".subset.csv";
  const std::filesystem::path dir = out.parent_path();
  const auto mesh_path = dir / mesh_name;
  const auto subset_path = dir / subset_name;

  if (name == "paper-full" || name == "paper-small") {
    detail::write_text(mesh_path, detail::benchmark_mesh_csv());
    const std::vector<Facet> mesh =
        load_mesh(mesh_path, "points");  // selection below indexes this order
    std::ostringstream subset;
    if (name == "paper-full") {
      // 14 facets spread over the surface: even strides through the
      // centroid-sorted facet list.
      subset << "# facets to cover\n";
      const int count = static_cast<int>(mesh.size());
      for (int i = 0; i < 14; ++i) subset << (i * count) / 14 << "\n";
      detail::write_text(out, detail::benchmark_mission_text(80, mesh_name, subset_name));
    } else {
      // The 3 facets nearest the start location, on the near rim.
      const Eigen::Vector3d start(10.0, 10.0, 10.0);
      std::vector<std::pair<double, int>> ranked;
      for (int i = 0; i < static_cast<int>(mesh.size()); ++i) {
        ranked.emplace_back((mesh[static_cast<std::size_t>(i)].centroid - start).norm(), i);
      }
      std::sort(ranked.begin(), ranked.end());
      subset << "# facets to cover\n";
      for (int i = 0; i < 3; ++i) subset << ranked[static_cast<std::size_t>(i)].second << "\n";
      detail::write_text(out, detail::benchmark_mission_text(25, mesh_name, subset_name));
    }
    detail::write_text(subset_path, subset.str());
    return out;
  }

  if (name == "single-waypoint") {
    // One ground facet below a hovering waypoint.  The direct start-to-goal
    // line passes underneath the waypoint region, so the visit margin decides
    // how far above that line the plan has to climb.
    detail::write_text(mesh_path,
                       "# single ground facet\n"
                       "47,48,0,53,48,0,50,54,0\n");
    std::ostringstream os;
    os << "# single-waypoint robustness mission\n"
       << "dynamics.dt = 0.1\n"
       << "dynamics.v_max = 12\n"
       << "dynamics.omega_max = " << ioutil::fmt(kPi / 3.0) << "\n"
       << "dynamics.q_diag = 0.25,0.01,0.01\n"
       << "dynamics.noise_mean = 0,0,0\n"
       << "dynamics.x0_mean = 50,35,10,0," << ioutil::fmt(kPi / 2.0) << "\n"
       << "dynamics.x0_cov_diag = 0.0001,0.0001,0.0001,0.0001,0.0001\n"
       << "camera.h_fov = 15\n"
       << "camera.phi_h_deg = 60\n"
       << "camera.phi_v_deg = 60\n"
       << "camera.psi_y_deg = 0,45,90\n"
       << "camera.psi_z_deg = -90,0,90,180\n"
       << "ut.alpha = 1\n"
       << "ut.rho = 2.5\n"
       << "ut.beta = 2\n"
       << "mission.T = 20\n"
       << "mission.delta_w = 0.4\n"
       << "mission.delta_o = 0.3\n"
       << "mission.c = 0.8\n"
       << "mission.waypoint_edge = 5\n"
       << "mission.goal = 50,65,5\n"
       << "mission.env_min = 0,0,0\n"
       << "mission.env_max = 100,100,100\n"
       << "mission.cover_vertices = false\n"
       << "mesh.source = " << mesh_name << "\n"
       << "mesh.format = triangles\n"
       << "obstacles.count = 0\n"
       << "solver.seed = 1\n"
       << "solver.multistarts = 2\n";
    detail::write_text(out, os.str());
    return out;
  }

  if (name == "corridor") {
    // Two 12 m wall boxes with a 3 m gap at x in [48.5, 51.5]; the facet and
    // goal sit behind the wall, so the plan threads the gap or climbs over.
    // The wide lateral start uncertainty makes the gap margin-infeasible at
    // tight collision budgets while leaving it open at loose ones.
    detail::write_text(mesh_path,
                       "# ground facet behind the wall\n"
                       "47,62,0,53,62,0,50,68,0\n");
    std::ostringstream os;
    os << "# corridor collision-probability mission\n"
       << "dynamics.dt = 0.1\n"
       << "dynamics.v_max = 12\n"
       << "dynamics.omega_max = " << ioutil::fmt(kPi / 3.0) << "\n"
       << "dynamics.q_diag = 0.09,0.012,0.012\n"
       << "dynamics.noise_mean = 0,0,0\n"
       << "dynamics.x0_mean = 50,15,8,0," << ioutil::fmt(kPi / 2.0) << "\n"
       << "dynamics.x0_cov_diag = 0.49,0.04,0.01,0.0001,0.0001\n"
       << "camera.h_fov = 15\n"
       << "camera.phi_h_deg = 60\n"
       << "camera.phi_v_deg = 60\n"
       << "camera.psi_y_deg = 0,45,90\n"
       << "camera.psi_z_deg = -90,0,90,180\n"
       << "ut.alpha = 1\n"
       << "ut.rho = 2.5\n"
       << "ut.beta = 2\n"
       << "mission.T = 60\n"
       << "mission.delta_w = 0.4\n"
       << "mission.delta_o = 0.3\n"
       << "mission.c = 0.8\n"
       << "mission.waypoint_edge = 5\n"
       << "mission.goal = 50,80,5\n"
       << "mission.env_min = 0,0,0\n"
       << "mission.env_max = 100,100,100\n"
       << "mission.cover_vertices = false\n"
       << "mesh.source = " << mesh_name << "\n"
       << "mesh.format = triangles\n"
       << "obstacles.count = 2\n"
       << "obstacles.box0 = 20,35,0,48.5,45,12\n"
       << "obstacles.box1 = 51.5,35,0,80,45,12\n"
       << "solver.seed = 1\n"
       << "solver.multistarts = 2\n";
    detail::write_text(out, os.str());
    return out;
  }

  throw FileError("unknown fixture '" + name +
                  "' (expected paper-full, paper-small, single-waypoint, corridor)");
}

}  // namespace ucover
