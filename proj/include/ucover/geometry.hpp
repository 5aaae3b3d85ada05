#pragma once
// Scene geometry: half-space polytopes and containment, triangular surface
// facets, the camera's rotated view-pyramid states, and the cubic waypoint
// regions placed above facets.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ucover/math.hpp"

namespace ucover {

struct HalfSpace {
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // unit outward normal
  double offset = 0.0;  // inside means normal.dot(p) <= offset
};

// Intersection of finitely many half-spaces.  Boundedness is a construction
// precondition; the factory helpers below only build bounded sets.
struct ConvexPolytope {
  std::vector<HalfSpace> faces;
};

inline bool point_in_polytope(const Eigen::Vector3d& p, const ConvexPolytope& poly,
                              double tol = 1e-9) {
  if (poly.faces.empty()) {
    throw std::invalid_argument("point_in_polytope: polytope has no faces");
  }
  for (const auto& f : poly.faces) {
    if (f.normal.dot(p) > f.offset + tol) return false;
  }
  return true;
}

// Translates a polytope: half-space offsets shift by the normal component of t.
inline ConvexPolytope translate(const ConvexPolytope& poly, const Eigen::Vector3d& t) {
  ConvexPolytope out = poly;
  for (auto& f : out.faces) f.offset += f.normal.dot(t);
  return out;
}

// Axis-aligned box [lo, hi] as 6 half-spaces, ordered +x,-x,+y,-y,+z,-z.
inline ConvexPolytope make_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  if (!((hi - lo).minCoeff() > 0.0)) {
    throw std::invalid_argument("make_box: hi must exceed lo on every axis");
  }
  ConvexPolytope box;
  box.faces.reserve(6);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    n[axis] = 1.0;
    box.faces.push_back({n, hi[axis]});
    n[axis] = -1.0;
    box.faces.push_back({n, -lo[axis]});
  }
  return box;
}

// Triangular element of the target surface.
struct Facet {
  std::array<Eigen::Vector3d, 3> vertices;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d unit_normal = Eigen::Vector3d::UnitZ();

  static Facet from_vertices(const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                             const Eigen::Vector3d& v2) {
    Facet f;
    f.vertices = {v0, v1, v2};
    f.centroid = (v0 + v1 + v2) / 3.0;
    const Eigen::Vector3d n = (v1 - v0).cross(v2 - v0);
    const double len = n.norm();
    if (len <= 1e-12) {
      throw std::invalid_argument("Facet: vertices are collinear");
    }
    f.unit_normal = n / len;
    return f;
  }
};

// Camera intrinsics plus the finite gimbal attitude sets.
struct CameraConfig {
  double h_fov = 0.0;          // viewing depth of the pyramid, m
  double phi_h = 0.0;          // horizontal opening angle, rad
  double phi_v = 0.0;          // vertical opening angle, rad
  std::vector<double> psi_y;   // admissible pitch rotations, rad, within [-pi/2, pi/2]
  std::vector<double> psi_z;   // admissible yaw rotations, rad, within (-pi, pi]

  void validate() const {
    if (!(h_fov > 0.0)) throw std::invalid_argument("CameraConfig: h_fov must be positive");
    if (!(phi_h > 0.0 && phi_h < kPi)) {
      throw std::invalid_argument("CameraConfig: phi_h outside (0, pi)");
    }
    if (!(phi_v > 0.0 && phi_v < kPi)) {
      throw std::invalid_argument("CameraConfig: phi_v outside (0, pi)");
    }
    if (psi_y.empty() || psi_z.empty()) {
      throw std::invalid_argument("CameraConfig: rotation sets must be nonempty");
    }
    const double tol = 1e-12;
    for (double a : psi_y) {
      if (!(a >= -kPi / 2 - tol && a <= kPi / 2 + tol)) {
        throw std::invalid_argument("CameraConfig: psi_y entry outside [-pi/2, pi/2]");
      }
    }
    for (double a : psi_z) {
      if (!(a > -kPi - tol && a <= kPi + tol)) {
        throw std::invalid_argument("CameraConfig: psi_z entry outside (-pi, pi]");
      }
    }
  }
};

inline Eigen::Matrix3d rotation_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0.0, std::sin(a),
       0.0, 1.0, 0.0,
       -std::sin(a), 0.0, std::cos(a);
  return r;
}

inline Eigen::Matrix3d rotation_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0.0,
       std::sin(a), std::cos(a), 0.0,
       0.0, 0.0, 1.0;
  return r;
}

// Vertices of the unrotated view pyramid: apex at the origin, optical axis
// along +x, base at depth h_fov.  Columns 1-4 are base corners (counter-
// clockwise seen from +x), column 5 the apex.
inline Eigen::Matrix<double, 3, 5> base_fov_vertices(const CameraConfig& cfg) {
  cfg.validate();
  const double l = 2.0 * cfg.h_fov * std::tan(0.5 * cfg.phi_h);
  const double w = 2.0 * cfg.h_fov * std::tan(0.5 * cfg.phi_v);
  Eigen::Matrix<double, 3, 5> v;
  v << cfg.h_fov, cfg.h_fov, cfg.h_fov, cfg.h_fov, 0.0,
       0.5 * l, 0.5 * l, -0.5 * l, -0.5 * l, 0.0,
       0.5 * w, -0.5 * w, -0.5 * w, 0.5 * w, 0.0;
  return v;
}

// Half-space hull of a view pyramid given its 5 vertices (apex last).
// Lateral face normals come from edge cross products, sign-fixed so the
// opposite base corner stays on the inner side; the base face normal is the
// rotated view axis.
inline ConvexPolytope fov_polytope(const Eigen::Matrix<double, 3, 5>& v) {
  ConvexPolytope poly;
  poly.faces.reserve(5);
  const Eigen::Vector3d apex = v.col(4);
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d e0 = v.col(i) - apex;
    const Eigen::Vector3d e1 = v.col((i + 1) % 4) - apex;
    Eigen::Vector3d n = e0.cross(e1);
    const double len = n.norm();
    if (len <= 1e-12) throw std::invalid_argument("fov_polytope: degenerate pyramid");
    n /= len;
    double off = n.dot(apex);
    if (n.dot(v.col((i + 2) % 4)) > off) {
      n = -n;
      off = -off;
    }
    poly.faces.push_back({n, off});
  }
  Eigen::Vector3d axis =
      0.25 * (v.col(0) + v.col(1) + v.col(2) + v.col(3)) - apex;
  const double len = axis.norm();
  if (len <= 1e-12) throw std::invalid_argument("fov_polytope: degenerate base");
  axis /= len;
  double off = axis.dot(v.col(0));
  if (axis.dot(apex) > off) {
    axis = -axis;
    off = -off;
  }
  poly.faces.push_back({axis, off});
  return poly;
}

// One admissible camera attitude: the rotated pyramid and its half-space
// form, both expressed with the apex at the origin (body frame).
struct FovState {
  int index = 0;       // position in the row-major (psi_y outer) enumeration
  double psi_y = 0.0;
  double psi_z = 0.0;
  Eigen::Matrix<double, 3, 5> vertices_body;
  ConvexPolytope half_spaces_body;
};

inline std::vector<FovState> enumerate_fov_states(const CameraConfig& cfg) {
  cfg.validate();
  const Eigen::Matrix<double, 3, 5> v0 = base_fov_vertices(cfg);
  std::vector<FovState> states;
  states.reserve(cfg.psi_y.size() * cfg.psi_z.size());
  for (double py : cfg.psi_y) {
    for (double pz : cfg.psi_z) {
      FovState s;
      s.index = static_cast<int>(states.size());
      s.psi_y = py;
      s.psi_z = pz;
      s.vertices_body = rotation_z(pz) * rotation_y(py) * v0;
      s.half_spaces_body = fov_polytope(s.vertices_body);
      states.push_back(std::move(s));
    }
  }
  return states;
}

// Cubic region a fixed standoff above a facet along its normal.  Faces are
// axis-aligned and ordered +x,-x,+y,-y,+z,-z.
struct Waypoint {
  int facet_index = -1;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double edge_length = 0.0;
  ConvexPolytope cube;
};

inline Waypoint make_waypoint(const Facet& facet, int facet_index, double standoff_scale,
                              double h_fov, double edge_length) {
  if (!(edge_length > 0.0)) {
    throw std::invalid_argument("make_waypoint: edge_length must be positive");
  }
  if (!std::isfinite(standoff_scale) || !std::isfinite(h_fov)) {
    throw std::invalid_argument("make_waypoint: non-finite inputs");
  }
  Waypoint w;
  w.facet_index = facet_index;
  w.center = facet.centroid + standoff_scale * h_fov * facet.unit_normal;
  w.edge_length = edge_length;
  const double h = 0.5 * edge_length;
  w.cube = make_box(w.center.array() - h, w.center.array() + h);
  return w;
}

}  // namespace ucover
