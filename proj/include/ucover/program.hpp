#pragma once
// Direct transcription of the coverage planning problem: flat decision-vector
// layout, named constraint residuals (guidance, camera, obstacle, bounds),
// the trajectory objective, and a cached evaluation path with derivatives.
//
// The belief trajectory is a deterministic function of the controls (single
// shooting), so beliefs never appear as decision variables.

#include <Eigen/Dense>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucover/dynamics.hpp"
#include "ucover/geometry.hpp"
#include "ucover/math.hpp"
#include "ucover/mission.hpp"
#include "ucover/uncertainty.hpp"

namespace ucover {

// Block order is [u | w1 | w2 | w3 | g1 | g2 | s | o]. Within every block the
// step index is the slowest-varying one. Auxiliary variables describe steps
// 1..T and are stored at slot t-1; index helpers take the 0-based slot.
// Slot t of the control block holds u_t, applied over [t, t+1).
//
// Within one step the sub-order is: w1 (n, then face l), g1 (n, target p,
// camera state m, face l), g2 (n, p, m), o (obstacle xi, face j).
struct DecisionLayout {
  int T = 0;   // steps
  int N = 0;   // waypoints
  int M = 0;   // camera states
  int L = 6;   // waypoint cube faces
  int Lf = 5;  // camera pyramid faces
  int P = 1;   // coverage targets per facet (1 centroid or 3 vertices)

  std::vector<int> obs_faces;   // faces per obstacle
  std::vector<int> obs_prefix;  // running face offsets, size obstacles+1
  int obs_total = 0;

  int u_off = 0, w1_off = 0, w2_off = 0, w3_off = 0;
  int g1_off = 0, g2_off = 0, s_off = 0, o_off = 0;
  int total = 0;

  static DecisionLayout make(const MissionSpec& spec) {
    DecisionLayout lay;
    lay.T = spec.horizon;
    lay.N = spec.waypoint_count();
    lay.M = spec.fov_count();
    lay.P = spec.cover_vertices ? 3 : 1;
    lay.obs_prefix.push_back(0);
    for (const auto& obs : spec.obstacles) {
      const int f = static_cast<int>(obs.faces.size());
      lay.obs_faces.push_back(f);
      lay.obs_prefix.push_back(lay.obs_prefix.back() + f);
    }
    lay.obs_total = lay.obs_prefix.back();

    const int T = lay.T, N = lay.N, M = lay.M;
    lay.u_off = 0;
    lay.w1_off = lay.u_off + 3 * T;
    lay.w2_off = lay.w1_off + T * N * lay.L;
    lay.w3_off = lay.w2_off + T * N;
    lay.g1_off = lay.w3_off + T * N;
    lay.g2_off = lay.g1_off + T * N * lay.P * M * lay.Lf;
    lay.s_off = lay.g2_off + T * N * lay.P * M;
    lay.o_off = lay.s_off + T * M;
    lay.total = lay.o_off + T * lay.obs_total;
    return lay;
  }

  int obstacle_count() const { return static_cast<int>(obs_faces.size()); }

  int u_index(int t, int k) const { return u_off + 3 * t + k; }
  int w1_index(int t, int n, int l) const { return w1_off + (t * N + n) * L + l; }
  int w2_index(int t, int n) const { return w2_off + t * N + n; }
  int w3_index(int t, int n) const { return w3_off + t * N + n; }
  int g1_index(int t, int n, int p, int m, int l) const {
    return g1_off + (((t * N + n) * P + p) * M + m) * Lf + l;
  }
  int g2_index(int t, int n, int p, int m) const {
    return g2_off + ((t * N + n) * P + p) * M + m;
  }
  int s_index(int t, int m) const { return s_off + t * M + m; }
  int o_index(int t, int xi, int j) const {
    return o_off + t * obs_total + obs_prefix[static_cast<std::size_t>(xi)] + j;
  }
};

// Flat vector plus typed access. Kept trivially copyable so multistart can
// fork candidates cheaply.
struct DecisionVector {
  DecisionLayout layout;
  Eigen::VectorXd x;

  explicit DecisionVector(const DecisionLayout& lay)
      : layout(lay), x(Eigen::VectorXd::Zero(lay.total)) {}

  ControlInput control(int t) const {
    return ControlInput{x[layout.u_index(t, 0)], x[layout.u_index(t, 1)],
                        x[layout.u_index(t, 2)]};
  }
  void set_control(int t, const ControlInput& u) {
    x[layout.u_index(t, 0)] = u.v;
    x[layout.u_index(t, 1)] = u.w_theta;
    x[layout.u_index(t, 2)] = u.w_phi;
  }
  std::vector<ControlInput> controls() const {
    std::vector<ControlInput> out;
    out.reserve(static_cast<std::size_t>(layout.T));
    for (int t = 0; t < layout.T; ++t) out.push_back(control(t));
    return out;
  }

  double& w1(int t, int n, int l) { return x[layout.w1_index(t, n, l)]; }
  double& w2(int t, int n) { return x[layout.w2_index(t, n)]; }
  double& w3(int t, int n) { return x[layout.w3_index(t, n)]; }
  double& g1(int t, int n, int p, int m, int l) { return x[layout.g1_index(t, n, p, m, l)]; }
  double& g2(int t, int n, int p, int m) { return x[layout.g2_index(t, n, p, m)]; }
  double& s(int t, int m) { return x[layout.s_index(t, m)]; }
  double& o(int t, int xi, int j) { return x[layout.o_index(t, xi, j)]; }

  double w1(int t, int n, int l) const { return x[layout.w1_index(t, n, l)]; }
  double w2(int t, int n) const { return x[layout.w2_index(t, n)]; }
  double w3(int t, int n) const { return x[layout.w3_index(t, n)]; }
  double g1(int t, int n, int p, int m, int l) const { return x[layout.g1_index(t, n, p, m, l)]; }
  double g2(int t, int n, int p, int m) const { return x[layout.g2_index(t, n, p, m)]; }
  double s(int t, int m) const { return x[layout.s_index(t, m)]; }
  double o(int t, int xi, int j) const { return x[layout.o_index(t, xi, j)]; }
};

inline std::vector<GaussianBelief> belief_trajectory(
    const MissionSpec& spec, const std::vector<ControlInput>& controls) {
  if (static_cast<int>(controls.size()) != spec.horizon) {
    throw std::invalid_argument("belief_trajectory: control count != horizon");
  }
  std::vector<GaussianBelief> beliefs;
  beliefs.reserve(static_cast<std::size_t>(spec.horizon) + 1);
  beliefs.push_back(spec.initial_belief);
  for (int t = 0; t < spec.horizon; ++t) {
    beliefs.push_back(propagate(beliefs.back(), spec.disturbance,
                                controls[static_cast<std::size_t>(t)], spec.dt,
                                spec.ut_config));
  }
  return beliefs;
}

// Canonical residual: equality rows mean value = 0, inequality rows mean
// value <= 0.
struct NamedResidual {
  std::string name;
  double value = 0.0;
  bool equality = false;
};

namespace detail {

inline std::string row_name(const char* fmt, ...) {
  char buf[96];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

}  // namespace detail

// The three builders below are the reference (uncached) residual definitions.
// The step label printed in names is the physical step 1..T.

inline std::vector<NamedResidual> guidance_residuals(
    const MissionSpec& spec, const std::vector<GaussianBelief>& beliefs,
    const DecisionVector& dec) {
  const DecisionLayout& lay = dec.layout;
  if (static_cast<int>(beliefs.size()) != lay.T + 1) {
    throw std::invalid_argument("guidance_residuals: belief count != T+1");
  }
  std::vector<NamedResidual> out;
  for (int t = 0; t < lay.T; ++t) {
    const Eigen::Vector3d p = beliefs[static_cast<std::size_t>(t + 1)].position_mean();
    const Eigen::Matrix3d pc = beliefs[static_cast<std::size_t>(t + 1)].position_cov();
    for (int n = 0; n < lay.N; ++n) {
      const auto& faces = spec.waypoints[static_cast<std::size_t>(n)].cube.faces;
      for (int l = 0; l < lay.L; ++l) {
        const HalfSpace& f = faces[static_cast<std::size_t>(l)];
        const double zeta = chance_margin(f.normal, pc, spec.delta_w);
        out.push_back({detail::row_name("waypoint_face[n=%d,l=%d,t=%d]", n, l, t + 1),
                       dec.w1(t, n, l) * (f.normal.dot(p) - f.offset + zeta), false});
      }
      out.push_back({detail::row_name("visit_gate[n=%d,t=%d]", n, t + 1),
                     -dec.w3(t, n) * dec.w2(t, n), false});
      out.push_back({detail::row_name("waypoint_face_count[n=%d,t=%d]", n, t + 1),
                     dec.w2(t, n) - [&] {
                       double sum = 0.0;
                       for (int l = 0; l < lay.L; ++l) sum += dec.w1(t, n, l);
                       return sum;
                     }() + lay.L,
                     true});
    }
  }
  for (int n = 0; n < lay.N; ++n) {
    double sum = 0.0;
    for (int t = 0; t < lay.T; ++t) sum += dec.w3(t, n);
    out.push_back({detail::row_name("visit_once[n=%d]", n), sum - 1.0, true});
  }
  return out;
}

inline std::vector<NamedResidual> camera_residuals(
    const MissionSpec& spec, const std::vector<GaussianBelief>& beliefs,
    const DecisionVector& dec) {
  const DecisionLayout& lay = dec.layout;
  if (static_cast<int>(beliefs.size()) != lay.T + 1) {
    throw std::invalid_argument("camera_residuals: belief count != T+1");
  }
  std::vector<NamedResidual> out;
  for (int t = 0; t < lay.T; ++t) {
    const Eigen::Vector3d p = beliefs[static_cast<std::size_t>(t + 1)].position_mean();
    for (int n = 0; n < lay.N; ++n) {
      const Facet& facet = spec.facets_to_cover[static_cast<std::size_t>(n)];
      for (int pi = 0; pi < lay.P; ++pi) {
        const Eigen::Vector3d target =
            (lay.P == 1) ? facet.centroid : facet.vertices[static_cast<std::size_t>(pi)];
        for (int m = 0; m < lay.M; ++m) {
          const auto& hs = spec.fov_states[static_cast<std::size_t>(m)].half_spaces_body.faces;
          double g1sum = 0.0;
          for (int l = 0; l < lay.Lf; ++l) {
            const HalfSpace& f = hs[static_cast<std::size_t>(l)];
            out.push_back(
                {detail::row_name("camera_face[n=%d,p=%d,m=%d,l=%d,t=%d]", n, pi, m, l, t + 1),
                 dec.g1(t, n, pi, m, l) * (f.normal.dot(target - p) - f.offset), false});
            g1sum += dec.g1(t, n, pi, m, l);
          }
          out.push_back({detail::row_name("camera_face_count[n=%d,p=%d,m=%d,t=%d]", n, pi, m, t + 1),
                         dec.g2(t, n, pi, m) - g1sum + lay.Lf, true});
          out.push_back({detail::row_name("camera_gate[n=%d,p=%d,m=%d,t=%d]", n, pi, m, t + 1),
                         -dec.g2(t, n, pi, m) * dec.w3(t, n) * dec.s(t, m), false});
        }
      }
    }
    double ssum = 0.0, ssq = 0.0;
    for (int m = 0; m < lay.M; ++m) {
      ssum += dec.s(t, m);
      ssq += dec.s(t, m) * dec.s(t, m);
    }
    out.push_back({detail::row_name("fov_simplex[t=%d]", t + 1), ssum - 1.0, true});
    out.push_back({detail::row_name("fov_onehot[t=%d]", t + 1), ssq - 1.0, true});
  }
  return out;
}

inline std::vector<NamedResidual> obstacle_residuals(
    const MissionSpec& spec, const std::vector<GaussianBelief>& beliefs,
    const DecisionVector& dec) {
  const DecisionLayout& lay = dec.layout;
  if (static_cast<int>(beliefs.size()) != lay.T + 1) {
    throw std::invalid_argument("obstacle_residuals: belief count != T+1");
  }
  std::vector<NamedResidual> out;
  for (int t = 0; t < lay.T; ++t) {
    const Eigen::Vector3d p = beliefs[static_cast<std::size_t>(t + 1)].position_mean();
    const Eigen::Matrix3d pc = beliefs[static_cast<std::size_t>(t + 1)].position_cov();
    for (int xi = 0; xi < lay.obstacle_count(); ++xi) {
      const auto& faces = spec.obstacles[static_cast<std::size_t>(xi)].faces;
      double osum = 0.0;
      for (int j = 0; j < lay.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
        const HalfSpace& f = faces[static_cast<std::size_t>(j)];
        const double zeta = chance_margin(f.normal, pc, spec.delta_o);
        // Stay on the outside of the selected face by at least zeta:
        // o * (a'p - b) >= zeta * o, canonically o * (zeta + b - a'p) <= 0.
        out.push_back({detail::row_name("obstacle_face[xi=%d,j=%d,t=%d]", xi, j, t + 1),
                       dec.o(t, xi, j) * (zeta + f.offset - f.normal.dot(p)), false});
        osum += dec.o(t, xi, j);
      }
      out.push_back({detail::row_name("obstacle_face_select[xi=%d,t=%d]", xi, t + 1),
                     osum - 1.0, true});
    }
  }
  return out;
}

inline double objective(const MissionSpec& spec,
                        const std::vector<GaussianBelief>& beliefs,
                        const std::vector<ControlInput>& controls) {
  if (beliefs.size() != controls.size() + 1) {
    throw std::invalid_argument("objective: beliefs must be controls+1 long");
  }
  double f = 0.0;
  for (const auto& u : controls) {
    f += u.v * u.v + u.w_theta * u.w_theta + u.w_phi * u.w_phi;
  }
  const Eigen::Vector3d err = beliefs.back().position_mean() - spec.goal_centroid;
  return f + err.squaredNorm();
}

// Immutable transcription. Evaluation state (belief cache, sensitivities)
// lives in a caller-owned Workspace so concurrent solves never share state.
class TranscribedProgram {
 public:
  explicit TranscribedProgram(MissionSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.waypoint_count() < 1 || spec_.horizon < 1) {
      throw std::invalid_argument("transcribe: requires horizon >= waypoints >= 1");
    }
    lay_ = DecisionLayout::make(spec_);
    erf_w_ = erf_inv(1.0 - 2.0 * spec_.delta_w);
    erf_o_ = erf_inv(1.0 - 2.0 * spec_.delta_o);

    wp_a_.resize(3, lay_.N * lay_.L);
    wp_b_.resize(lay_.N * lay_.L);
    for (int n = 0; n < lay_.N; ++n) {
      const auto& faces = spec_.waypoints[static_cast<std::size_t>(n)].cube.faces;
      if (static_cast<int>(faces.size()) != lay_.L) {
        throw std::invalid_argument("transcribe: waypoint region must have 6 faces");
      }
      for (int l = 0; l < lay_.L; ++l) {
        wp_a_.col(n * lay_.L + l) = faces[static_cast<std::size_t>(l)].normal;
        wp_b_[n * lay_.L + l] = faces[static_cast<std::size_t>(l)].offset;
      }
    }

    fov_a_.resize(3, lay_.M * lay_.Lf);
    fov_b_.resize(lay_.M * lay_.Lf);
    for (int m = 0; m < lay_.M; ++m) {
      const auto& hs = spec_.fov_states[static_cast<std::size_t>(m)].half_spaces_body.faces;
      if (static_cast<int>(hs.size()) != lay_.Lf) {
        throw std::invalid_argument("transcribe: camera state must have 5 faces");
      }
      for (int l = 0; l < lay_.Lf; ++l) {
        fov_a_.col(m * lay_.Lf + l) = hs[static_cast<std::size_t>(l)].normal;
        fov_b_[m * lay_.Lf + l] = hs[static_cast<std::size_t>(l)].offset;
      }
    }

    targets_.resize(3, lay_.N * lay_.P);
    for (int n = 0; n < lay_.N; ++n) {
      const Facet& facet = spec_.facets_to_cover[static_cast<std::size_t>(n)];
      if (lay_.P == 1) {
        targets_.col(n) = facet.centroid;
      } else {
        for (int p = 0; p < 3; ++p) {
          targets_.col(n * 3 + p) = facet.vertices[static_cast<std::size_t>(p)];
        }
      }
    }

    obs_a_.resize(3, lay_.obs_total);
    obs_b_.resize(lay_.obs_total);
    for (int xi = 0; xi < lay_.obstacle_count(); ++xi) {
      const auto& faces = spec_.obstacles[static_cast<std::size_t>(xi)].faces;
      for (int j = 0; j < lay_.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
        const int col = lay_.obs_prefix[static_cast<std::size_t>(xi)] + j;
        obs_a_.col(col) = faces[static_cast<std::size_t>(j)].normal;
        obs_b_[col] = faces[static_cast<std::size_t>(j)].offset;
      }
    }

    const int T = lay_.T, N = lay_.N, M = lay_.M, P = lay_.P;
    eq_a_ = 0;
    eq_b_ = eq_a_ + T * N;
    eq_c_ = eq_b_ + N;
    eq_d_ = eq_c_ + T * N * P * M;
    eq_e_ = eq_d_ + T;
    eq_f_ = eq_e_ + T;
    eq_count_ = eq_f_ + T * lay_.obstacle_count();

    iq_wface_ = 0;
    iq_gate_ = iq_wface_ + T * N * lay_.L;
    iq_cface_ = iq_gate_ + T * N;
    iq_cgate_ = iq_cface_ + T * N * P * M * lay_.Lf;
    iq_oface_ = iq_cgate_ + T * N * P * M;
    iq_env_ = iq_oface_ + T * lay_.obs_total;
    ineq_count_ = iq_env_ + T * 6;

    lower_ = Eigen::VectorXd::Zero(lay_.total);
    upper_ = Eigen::VectorXd::Ones(lay_.total);
    for (int t = 0; t < T; ++t) {
      lower_[lay_.u_index(t, 0)] = -spec_.control_bounds.v_max;
      upper_[lay_.u_index(t, 0)] = spec_.control_bounds.v_max;
      for (int k = 1; k < 3; ++k) {
        lower_[lay_.u_index(t, k)] = -spec_.control_bounds.omega_max;
        upper_[lay_.u_index(t, k)] = spec_.control_bounds.omega_max;
      }
      for (int n = 0; n < N; ++n) {
        lower_[lay_.w2_index(t, n)] = -static_cast<double>(lay_.L);
        upper_[lay_.w2_index(t, n)] = 0.0;
        for (int p = 0; p < P; ++p) {
          for (int m = 0; m < M; ++m) {
            lower_[lay_.g2_index(t, n, p, m)] = -static_cast<double>(lay_.Lf);
            upper_[lay_.g2_index(t, n, p, m)] = 0.0;
          }
        }
      }
    }
  }

  const MissionSpec& mission() const { return spec_; }
  const DecisionLayout& layout() const { return lay_; }
  int var_count() const { return lay_.total; }
  int eq_count() const { return eq_count_; }
  int ineq_count() const { return ineq_count_; }
  const Eigen::VectorXd& lower_bounds() const { return lower_; }
  const Eigen::VectorXd& upper_bounds() const { return upper_; }

  // Rows the solver may relax during continuation: the trilinear camera
  // gates, g in [relax_begin, relax_end).
  int relax_begin() const { return iq_cgate_; }
  int relax_end() const { return iq_oface_; }

  // Product-form gate rows (visit and camera): the rows whose multipliers
  // carry the entire coupling between the logical indicators and the
  // trajectory, and therefore the rows worth warm-starting.
  int visit_gate_begin() const { return iq_gate_; }
  int visit_gate_end() const { return iq_cface_; }

  struct Workspace {
    Eigen::VectorXd cached_u;  // empty while invalid
    std::vector<GaussianBelief> beliefs;
    Eigen::MatrixXd pos;     // 3 x (T+1) mean positions
    Eigen::MatrixXd zeta_w;  // (N*L) x (T+1) waypoint margins, col 0 unused
    Eigen::MatrixXd zeta_o;  // obs_total x (T+1) obstacle margins

    bool sens_valid = false;
    Eigen::MatrixXd pos_sens;  // (3(T+1)) x 3T, d pos / d u
    Eigen::MatrixXd zw_sens;   // (N*L*(T+1)) x 3T
    Eigen::MatrixXd zo_sens;   // (obs_total*(T+1)) x 3T

    // scratch
    std::vector<GaussianBelief> bel_scratch;
    Eigen::MatrixXd pos_p, zw_p, zo_p, pos_m, zw_m, zo_m;
    Eigen::MatrixXd dpos, dzw, dzo;
  };

  // Any subset of {f, h, g} may be requested. h-rows are equalities (= 0),
  // g-rows inequalities (<= 0); both in the documented family order.
  void evaluate(const Eigen::VectorXd& x, Workspace& ws, double* f,
                Eigen::VectorXd* h, Eigen::VectorXd* g) const {
    require_size(x);
    ensure_values(x, ws);
    const int T = lay_.T, N = lay_.N, M = lay_.M, P = lay_.P;

    if (f) {
      double obj = x.head(3 * T).squaredNorm();
      obj += (ws.pos.col(T) - spec_.goal_centroid).squaredNorm();
      *f = obj;
    }

    if (h) {
      h->resize(eq_count_);
      for (int t = 0; t < T; ++t) {
        for (int n = 0; n < N; ++n) {
          double w1sum = 0.0;
          for (int l = 0; l < lay_.L; ++l) w1sum += x[lay_.w1_index(t, n, l)];
          (*h)[eq_a_ + t * N + n] = x[lay_.w2_index(t, n)] - w1sum + lay_.L;
        }
      }
      for (int n = 0; n < N; ++n) {
        double w3sum = 0.0;
        for (int t = 0; t < T; ++t) w3sum += x[lay_.w3_index(t, n)];
        (*h)[eq_b_ + n] = w3sum - 1.0;
      }
      for (int t = 0; t < T; ++t) {
        for (int n = 0; n < N; ++n) {
          for (int p = 0; p < P; ++p) {
            for (int m = 0; m < M; ++m) {
              double g1sum = 0.0;
              for (int l = 0; l < lay_.Lf; ++l) g1sum += x[lay_.g1_index(t, n, p, m, l)];
              (*h)[eq_c_ + ((t * N + n) * P + p) * M + m] =
                  x[lay_.g2_index(t, n, p, m)] - g1sum + lay_.Lf;
            }
          }
        }
      }
      for (int t = 0; t < T; ++t) {
        double ssum = 0.0, ssq = 0.0;
        for (int m = 0; m < M; ++m) {
          const double sv = x[lay_.s_index(t, m)];
          ssum += sv;
          ssq += sv * sv;
        }
        (*h)[eq_d_ + t] = ssum - 1.0;
        (*h)[eq_e_ + t] = ssq - 1.0;
      }
      const int Xi = lay_.obstacle_count();
      for (int t = 0; t < T; ++t) {
        for (int xi = 0; xi < Xi; ++xi) {
          double osum = 0.0;
          for (int j = 0; j < lay_.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
            osum += x[lay_.o_index(t, xi, j)];
          }
          (*h)[eq_f_ + t * Xi + xi] = osum - 1.0;
        }
      }
    }

    if (g) {
      g->resize(ineq_count_);
      for (int t = 0; t < T; ++t) {
        const int bt = t + 1;
        for (int n = 0; n < N; ++n) {
          for (int l = 0; l < lay_.L; ++l) {
            const int c = n * lay_.L + l;
            const double face =
                wp_a_.col(c).dot(ws.pos.col(bt)) - wp_b_[c] + ws.zeta_w(c, bt);
            (*g)[iq_wface_ + (t * N + n) * lay_.L + l] = x[lay_.w1_index(t, n, l)] * face;
          }
          (*g)[iq_gate_ + t * N + n] =
              -x[lay_.w3_index(t, n)] * x[lay_.w2_index(t, n)];
        }
        for (int n = 0; n < N; ++n) {
          for (int p = 0; p < P; ++p) {
            const Eigen::Vector3d rel = targets_.col(n * P + p) - ws.pos.col(bt);
            for (int m = 0; m < M; ++m) {
              for (int l = 0; l < lay_.Lf; ++l) {
                const int c = m * lay_.Lf + l;
                (*g)[iq_cface_ + (((t * N + n) * P + p) * M + m) * lay_.Lf + l] =
                    x[lay_.g1_index(t, n, p, m, l)] * (fov_a_.col(c).dot(rel) - fov_b_[c]);
              }
              (*g)[iq_cgate_ + ((t * N + n) * P + p) * M + m] =
                  -x[lay_.g2_index(t, n, p, m)] * x[lay_.w3_index(t, n)] *
                  x[lay_.s_index(t, m)];
            }
          }
        }
        for (int xi = 0; xi < lay_.obstacle_count(); ++xi) {
          for (int j = 0; j < lay_.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
            const int c = lay_.obs_prefix[static_cast<std::size_t>(xi)] + j;
            (*g)[iq_oface_ + t * lay_.obs_total + c] =
                x[lay_.o_index(t, xi, j)] *
                (ws.zeta_o(c, bt) + obs_b_[c] - obs_a_.col(c).dot(ws.pos.col(bt)));
          }
        }
        for (int axis = 0; axis < 3; ++axis) {
          (*g)[iq_env_ + t * 6 + axis * 2 + 0] = ws.pos(axis, bt) - spec_.env_max[axis];
          (*g)[iq_env_ + t * 6 + axis * 2 + 1] = spec_.env_min[axis] - ws.pos(axis, bt);
        }
      }
    }
  }

  // Accumulates wf * grad(f) + Jh' * wh + Jg' * wg. Aux-variable partials are
  // analytic; position/margin dependence on the controls goes through cached
  // finite-difference sensitivities of the belief trajectory.
  Eigen::VectorXd weighted_gradient(const Eigen::VectorXd& x, Workspace& ws,
                                    double wf, const Eigen::VectorXd& wh,
                                    const Eigen::VectorXd& wg) const {
    require_size(x);
    if (wh.size() != eq_count_ || wg.size() != ineq_count_) {
      throw std::invalid_argument("weighted_gradient: weight sizes mismatch");
    }
    ensure_sens(x, ws);
    const int T = lay_.T, N = lay_.N, M = lay_.M, P = lay_.P;
    const int nu = 3 * T;

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay_.total);
    ws.dpos.setZero(3, T + 1);
    ws.dzw.setZero(lay_.N * lay_.L, T + 1);
    ws.dzo.setZero(lay_.obs_total, T + 1);

    if (wf != 0.0) {
      grad.head(nu) += (2.0 * wf) * x.head(nu);
      ws.dpos.col(T) += (2.0 * wf) * (ws.pos.col(T) - spec_.goal_centroid);
    }

    for (int t = 0; t < T; ++t) {
      for (int n = 0; n < N; ++n) {
        const double c = wh[eq_a_ + t * N + n];
        if (c == 0.0) continue;
        grad[lay_.w2_index(t, n)] += c;
        for (int l = 0; l < lay_.L; ++l) grad[lay_.w1_index(t, n, l)] -= c;
      }
    }
    for (int n = 0; n < N; ++n) {
      const double c = wh[eq_b_ + n];
      if (c == 0.0) continue;
      for (int t = 0; t < T; ++t) grad[lay_.w3_index(t, n)] += c;
    }
    for (int t = 0; t < T; ++t) {
      for (int n = 0; n < N; ++n) {
        for (int p = 0; p < P; ++p) {
          for (int m = 0; m < M; ++m) {
            const double c = wh[eq_c_ + ((t * N + n) * P + p) * M + m];
            if (c == 0.0) continue;
            grad[lay_.g2_index(t, n, p, m)] += c;
            for (int l = 0; l < lay_.Lf; ++l) grad[lay_.g1_index(t, n, p, m, l)] -= c;
          }
        }
      }
    }
    for (int t = 0; t < T; ++t) {
      const double cd = wh[eq_d_ + t];
      const double ce = wh[eq_e_ + t];
      if (cd == 0.0 && ce == 0.0) continue;
      for (int m = 0; m < M; ++m) {
        grad[lay_.s_index(t, m)] += cd + ce * 2.0 * x[lay_.s_index(t, m)];
      }
    }
    {
      const int Xi = lay_.obstacle_count();
      for (int t = 0; t < T; ++t) {
        for (int xi = 0; xi < Xi; ++xi) {
          const double c = wh[eq_f_ + t * Xi + xi];
          if (c == 0.0) continue;
          for (int j = 0; j < lay_.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
            grad[lay_.o_index(t, xi, j)] += c;
          }
        }
      }
    }

    for (int t = 0; t < T; ++t) {
      const int bt = t + 1;
      for (int n = 0; n < N; ++n) {
        for (int l = 0; l < lay_.L; ++l) {
          const double c = wg[iq_wface_ + (t * N + n) * lay_.L + l];
          if (c == 0.0) continue;
          const int fc = n * lay_.L + l;
          const double w1v = x[lay_.w1_index(t, n, l)];
          const double face =
              wp_a_.col(fc).dot(ws.pos.col(bt)) - wp_b_[fc] + ws.zeta_w(fc, bt);
          grad[lay_.w1_index(t, n, l)] += c * face;
          ws.dpos.col(bt) += (c * w1v) * wp_a_.col(fc);
          ws.dzw(fc, bt) += c * w1v;
        }
        const double cg = wg[iq_gate_ + t * N + n];
        if (cg != 0.0) {
          grad[lay_.w3_index(t, n)] -= cg * x[lay_.w2_index(t, n)];
          grad[lay_.w2_index(t, n)] -= cg * x[lay_.w3_index(t, n)];
        }
      }
      for (int n = 0; n < N; ++n) {
        for (int p = 0; p < P; ++p) {
          const Eigen::Vector3d rel = targets_.col(n * P + p) - ws.pos.col(bt);
          for (int m = 0; m < M; ++m) {
            for (int l = 0; l < lay_.Lf; ++l) {
              const double c = wg[iq_cface_ + (((t * N + n) * P + p) * M + m) * lay_.Lf + l];
              if (c == 0.0) continue;
              const int fc = m * lay_.Lf + l;
              grad[lay_.g1_index(t, n, p, m, l)] += c * (fov_a_.col(fc).dot(rel) - fov_b_[fc]);
              ws.dpos.col(bt) -= (c * x[lay_.g1_index(t, n, p, m, l)]) * fov_a_.col(fc);
            }
            const double c = wg[iq_cgate_ + ((t * N + n) * P + p) * M + m];
            if (c == 0.0) continue;
            const double g2v = x[lay_.g2_index(t, n, p, m)];
            const double w3v = x[lay_.w3_index(t, n)];
            const double sv = x[lay_.s_index(t, m)];
            grad[lay_.g2_index(t, n, p, m)] -= c * w3v * sv;
            grad[lay_.w3_index(t, n)] -= c * g2v * sv;
            grad[lay_.s_index(t, m)] -= c * g2v * w3v;
          }
        }
      }
      for (int xi = 0; xi < lay_.obstacle_count(); ++xi) {
        for (int j = 0; j < lay_.obs_faces[static_cast<std::size_t>(xi)]; ++j) {
          const int fc = lay_.obs_prefix[static_cast<std::size_t>(xi)] + j;
          const double c = wg[iq_oface_ + t * lay_.obs_total + fc];
          if (c == 0.0) continue;
          const double ov = x[lay_.o_index(t, xi, j)];
          grad[lay_.o_index(t, xi, j)] +=
              c * (ws.zeta_o(fc, bt) + obs_b_[fc] - obs_a_.col(fc).dot(ws.pos.col(bt)));
          ws.dpos.col(bt) -= (c * ov) * obs_a_.col(fc);
          ws.dzo(fc, bt) += c * ov;
        }
      }
      for (int axis = 0; axis < 3; ++axis) {
        const double chi = wg[iq_env_ + t * 6 + axis * 2 + 0];
        const double clo = wg[iq_env_ + t * 6 + axis * 2 + 1];
        ws.dpos(axis, bt) += chi - clo;
      }
    }

    using CMap = Eigen::Map<const Eigen::VectorXd>;
    grad.head(nu).noalias() +=
        ws.pos_sens.transpose() * CMap(ws.dpos.data(), ws.dpos.size());
    if (ws.dzw.size() > 0) {
      grad.head(nu).noalias() +=
          ws.zw_sens.transpose() * CMap(ws.dzw.data(), ws.dzw.size());
    }
    if (ws.dzo.size() > 0) {
      grad.head(nu).noalias() +=
          ws.zo_sens.transpose() * CMap(ws.dzo.data(), ws.dzo.size());
    }
    return grad;
  }

  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x, Workspace& ws) const {
    return weighted_gradient(x, ws, 1.0, Eigen::VectorXd::Zero(eq_count_),
                             Eigen::VectorXd::Zero(ineq_count_));
  }
  Eigen::VectorXd eq_gradient(const Eigen::VectorXd& x, Workspace& ws, int row) const {
    Eigen::VectorXd wh = Eigen::VectorXd::Zero(eq_count_);
    wh[row] = 1.0;
    return weighted_gradient(x, ws, 0.0, wh, Eigen::VectorXd::Zero(ineq_count_));
  }
  Eigen::VectorXd ineq_gradient(const Eigen::VectorXd& x, Workspace& ws, int row) const {
    Eigen::VectorXd wg = Eigen::VectorXd::Zero(ineq_count_);
    wg[row] = 1.0;
    return weighted_gradient(x, ws, 0.0, Eigen::VectorXd::Zero(eq_count_), wg);
  }

  std::string eq_name(int i) const {
    const int N = lay_.N, M = lay_.M, P = lay_.P;
    if (i < 0 || i >= eq_count_) throw std::out_of_range("eq_name: bad row");
    if (i < eq_b_) {
      const int r = i - eq_a_;
      return detail::row_name("waypoint_face_count[n=%d,t=%d]", r % N, r / N + 1);
    }
    if (i < eq_c_) return detail::row_name("visit_once[n=%d]", i - eq_b_);
    if (i < eq_d_) {
      int r = i - eq_c_;
      const int m = r % M;
      r /= M;
      const int p = r % P;
      r /= P;
      return detail::row_name("camera_face_count[n=%d,p=%d,m=%d,t=%d]", r % N, p, m, r / N + 1);
    }
    if (i < eq_e_) return detail::row_name("fov_simplex[t=%d]", i - eq_d_ + 1);
    if (i < eq_f_) return detail::row_name("fov_onehot[t=%d]", i - eq_e_ + 1);
    const int r = i - eq_f_;
    const int Xi = lay_.obstacle_count();
    return detail::row_name("obstacle_face_select[xi=%d,t=%d]", r % Xi, r / Xi + 1);
  }

  std::string ineq_name(int i) const {
    const int N = lay_.N, M = lay_.M, P = lay_.P;
    if (i < 0 || i >= ineq_count_) throw std::out_of_range("ineq_name: bad row");
    if (i < iq_gate_) {
      int r = i - iq_wface_;
      const int l = r % lay_.L;
      r /= lay_.L;
      return detail::row_name("waypoint_face[n=%d,l=%d,t=%d]", r % N, l, r / N + 1);
    }
    if (i < iq_cface_) {
      const int r = i - iq_gate_;
      return detail::row_name("visit_gate[n=%d,t=%d]", r % N, r / N + 1);
    }
    if (i < iq_cgate_) {
      int r = i - iq_cface_;
      const int l = r % lay_.Lf;
      r /= lay_.Lf;
      const int m = r % M;
      r /= M;
      const int p = r % P;
      r /= P;
      return detail::row_name("camera_face[n=%d,p=%d,m=%d,l=%d,t=%d]", r % N, p, m, l, r / N + 1);
    }
    if (i < iq_oface_) {
      int r = i - iq_cgate_;
      const int m = r % M;
      r /= M;
      const int p = r % P;
      r /= P;
      return detail::row_name("camera_gate[n=%d,p=%d,m=%d,t=%d]", r % N, p, m, r / N + 1);
    }
    if (i < iq_env_) {
      int r = i - iq_oface_;
      const int c = r % lay_.obs_total;
      const int t = r / lay_.obs_total;
      int xi = 0;
      while (lay_.obs_prefix[static_cast<std::size_t>(xi) + 1] <= c) ++xi;
      return detail::row_name("obstacle_face[xi=%d,j=%d,t=%d]", xi,
                              c - lay_.obs_prefix[static_cast<std::size_t>(xi)], t + 1);
    }
    int r = i - iq_env_;
    const int side = r % 2;
    r /= 2;
    const int axis = r % 3;
    return detail::row_name("env_bound[%c,%s,t=%d]", "xyz"[axis], side == 0 ? "hi" : "lo",
                            r / 3 + 1);
  }

 private:
  void require_size(const Eigen::VectorXd& x) const {
    if (x.size() != lay_.total) {
      throw std::invalid_argument("TranscribedProgram: decision vector size mismatch");
    }
  }

  // Mean positions and chance margins for belief indices [t_begin, T].
  void derived_cols(const std::vector<GaussianBelief>& beliefs, int t_begin,
                    Eigen::MatrixXd& pos, Eigen::MatrixXd& zw,
                    Eigen::MatrixXd& zo) const {
    const int T = lay_.T;
    const int nwf = lay_.N * lay_.L;
    if (pos.rows() != 3 || pos.cols() != T + 1) pos.resize(3, T + 1);
    if (zw.rows() != nwf || zw.cols() != T + 1) zw.resize(nwf, T + 1);
    if (zo.rows() != lay_.obs_total || zo.cols() != T + 1) zo.resize(lay_.obs_total, T + 1);
    for (int bt = t_begin; bt <= T; ++bt) {
      const auto& b = beliefs[static_cast<std::size_t>(bt)];
      pos.col(bt) = b.position_mean();
      const Eigen::Matrix3d pc = b.position_cov();
      for (int c = 0; c < nwf; ++c) {
        const double q = std::max(0.0, wp_a_.col(c).dot(pc * wp_a_.col(c)));
        zw(c, bt) = std::sqrt(2.0 * q) * erf_w_;
      }
      for (int c = 0; c < lay_.obs_total; ++c) {
        const double q = std::max(0.0, obs_a_.col(c).dot(pc * obs_a_.col(c)));
        zo(c, bt) = std::sqrt(2.0 * q) * erf_o_;
      }
    }
  }

  void ensure_values(const Eigen::VectorXd& x, Workspace& ws) const {
    const int T = lay_.T;
    const auto u = x.head(3 * T);
    if (ws.cached_u.size() == u.size() && ws.cached_u == u) return;
    ws.beliefs.assign(1, spec_.initial_belief);
    ws.beliefs.reserve(static_cast<std::size_t>(T) + 1);
    for (int t = 0; t < T; ++t) {
      const ControlInput ut{x[lay_.u_index(t, 0)], x[lay_.u_index(t, 1)],
                            x[lay_.u_index(t, 2)]};
      ws.beliefs.push_back(
          propagate(ws.beliefs.back(), spec_.disturbance, ut, spec_.dt, spec_.ut_config));
    }
    derived_cols(ws.beliefs, 0, ws.pos, ws.zeta_w, ws.zeta_o);
    ws.cached_u = u;
    ws.sens_valid = false;
  }

  void ensure_sens(const Eigen::VectorXd& x, Workspace& ws) const {
    ensure_values(x, ws);
    if (ws.sens_valid) return;
    const int T = lay_.T;
    const int nu = 3 * T;
    const int nwf = lay_.N * lay_.L;
    ws.pos_sens.setZero(3 * (T + 1), nu);
    ws.zw_sens.setZero(nwf * (T + 1), nu);
    ws.zo_sens.setZero(lay_.obs_total * (T + 1), nu);
    ws.bel_scratch.resize(static_cast<std::size_t>(T) + 1);

    for (int k = 0; k < nu; ++k) {
      const int tk = k / 3;
      const double step = 1e-5 * std::max(1.0, std::abs(x[k]));
      for (int sgn = 0; sgn < 2; ++sgn) {
        const double delta = (sgn == 0) ? step : -step;
        ws.bel_scratch[static_cast<std::size_t>(tk)] =
            ws.beliefs[static_cast<std::size_t>(tk)];
        for (int t = tk; t < T; ++t) {
          ControlInput ut{x[lay_.u_index(t, 0)], x[lay_.u_index(t, 1)],
                          x[lay_.u_index(t, 2)]};
          if (t == tk) {
            if (k % 3 == 0) ut.v += delta;
            if (k % 3 == 1) ut.w_theta += delta;
            if (k % 3 == 2) ut.w_phi += delta;
          }
          ws.bel_scratch[static_cast<std::size_t>(t) + 1] =
              propagate(ws.bel_scratch[static_cast<std::size_t>(t)], spec_.disturbance,
                        ut, spec_.dt, spec_.ut_config);
        }
        if (sgn == 0) {
          derived_cols(ws.bel_scratch, tk + 1, ws.pos_p, ws.zw_p, ws.zo_p);
        } else {
          derived_cols(ws.bel_scratch, tk + 1, ws.pos_m, ws.zw_m, ws.zo_m);
        }
      }
      const double inv = 1.0 / (2.0 * step);
      for (int bt = tk + 1; bt <= T; ++bt) {
        ws.pos_sens.block(3 * bt, k, 3, 1) = (ws.pos_p.col(bt) - ws.pos_m.col(bt)) * inv;
        if (nwf > 0) {
          ws.zw_sens.block(nwf * bt, k, nwf, 1) = (ws.zw_p.col(bt) - ws.zw_m.col(bt)) * inv;
        }
        if (lay_.obs_total > 0) {
          ws.zo_sens.block(lay_.obs_total * bt, k, lay_.obs_total, 1) =
              (ws.zo_p.col(bt) - ws.zo_m.col(bt)) * inv;
        }
      }
    }
    ws.sens_valid = true;
  }

  MissionSpec spec_;
  DecisionLayout lay_;
  double erf_w_ = 0.0, erf_o_ = 0.0;

  Eigen::Matrix3Xd wp_a_, fov_a_, targets_, obs_a_;
  Eigen::VectorXd wp_b_, fov_b_, obs_b_;

  int eq_a_ = 0, eq_b_ = 0, eq_c_ = 0, eq_d_ = 0, eq_e_ = 0, eq_f_ = 0, eq_count_ = 0;
  int iq_wface_ = 0, iq_gate_ = 0, iq_cface_ = 0, iq_cgate_ = 0, iq_oface_ = 0,
      iq_env_ = 0, ineq_count_ = 0;
  Eigen::VectorXd lower_, upper_;
};

}  // namespace ucover
