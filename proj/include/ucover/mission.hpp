#pragma once
// Mission description shared by the transcription, solver, validation, and
// file I/O layers.

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "ucover/dynamics.hpp"
#include "ucover/geometry.hpp"
#include "ucover/uncertainty.hpp"

namespace ucover {

struct MissionSpec {
  int horizon = 0;  // T, steps
  double dt = 0.1;  // s

  std::vector<Facet> facets_to_cover;   // N facets, same order as waypoints
  std::vector<Waypoint> waypoints;      // N cubic visit regions
  std::vector<FovState> fov_states;     // M admissible camera attitudes
  std::vector<ConvexPolytope> obstacles;

  Eigen::Vector3d goal_centroid = Eigen::Vector3d::Zero();
  double delta_w = 0.4;  // per-face waypoint miss probability bound
  double delta_o = 0.3;  // per-obstacle collision probability bound

  Eigen::Vector3d env_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d env_max = Eigen::Vector3d::Zero();
  ControlBounds control_bounds;

  GaussianBelief initial_belief;
  DisturbanceModel disturbance;
  UtConfig ut_config;
  CameraConfig camera_config;

  // When set, camera constraints target all 3 facet vertices instead of the
  // centroid alone.
  bool cover_vertices = false;

  int waypoint_count() const { return static_cast<int>(waypoints.size()); }
  int fov_count() const { return static_cast<int>(fov_states.size()); }
  int obstacle_count() const { return static_cast<int>(obstacles.size()); }

  void validate() const {
    if (facets_to_cover.size() != waypoints.size()) {
      throw std::invalid_argument("MissionSpec: facet/waypoint count mismatch");
    }
    if (!(delta_w > 0.0 && delta_w < 1.0) || !(delta_o > 0.0 && delta_o < 1.0)) {
      throw std::invalid_argument("MissionSpec: chance bounds must lie in (0, 1)");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("MissionSpec: dt must be positive");
    if (horizon < waypoint_count()) {
      throw std::invalid_argument("MissionSpec: horizon shorter than waypoint count");
    }
    if (((env_max - env_min).array() <= 0.0).any()) {
      throw std::invalid_argument("MissionSpec: env_max must exceed env_min");
    }
    if (!(control_bounds.v_max > 0.0) || !(control_bounds.omega_max > 0.0)) {
      throw std::invalid_argument("MissionSpec: control bounds must be positive");
    }
    if (fov_states.empty()) {
      throw std::invalid_argument("MissionSpec: no camera states");
    }
    for (const auto& obs : obstacles) {
      if (obs.faces.empty()) {
        throw std::invalid_argument("MissionSpec: obstacle with no faces");
      }
    }
    disturbance.validate();
    ut_config.validate();
    initial_belief.validate();
  }
};

}  // namespace ucover
