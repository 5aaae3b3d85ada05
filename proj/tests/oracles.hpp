#pragma once
// Reference implementations used only by tests: written independently of the
// library code paths they check, favoring brute force over speed.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Inverse erf by plain bisection on std::erf.
inline double erf_inv(double y) {
  double lo = -6.0, hi = 6.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erf(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Standard normal quantile by bisection on the CDF.
inline double normal_quantile(double p) {
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Chi-square CDF with 3 degrees of freedom (closed form) and its quantile.
inline double chi3_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return std::erf(std::sqrt(0.5 * x)) -
         std::sqrt(2.0 / 3.14159265358979323846) * std::sqrt(x) * std::exp(-0.5 * x);
}

inline double chi3_quantile(double p) {
  double lo = 0.0, hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi3_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Containment in the tetrahedron (a,b,c,d) via barycentric coordinates.
inline bool point_in_tetrahedron(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                 const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                                 const Eigen::Vector3d& d, double tol = 1e-9) {
  Eigen::Matrix3d m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  m.col(2) = d - a;
  const Eigen::Vector3d lam = m.fullPivLu().solve(p - a);
  if (lam.minCoeff() < -tol) return false;
  return lam.sum() <= 1.0 + tol;
}

// A quad-base pyramid (base columns 0..3 in ring order, apex column 4) is the
// union of two tetrahedra sharing the base diagonal.
inline bool point_in_pyramid(const Eigen::Vector3d& p,
                             const Eigen::Matrix<double, 3, 5>& v, double tol = 1e-9) {
  return point_in_tetrahedron(p, v.col(4), v.col(0), v.col(1), v.col(2), tol) ||
         point_in_tetrahedron(p, v.col(4), v.col(0), v.col(2), v.col(3), tol);
}

// Exact moments of y = A x + B w + c for x ~ N(mx, Px), w ~ N(mw, Q).
struct AffineMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline AffineMoments affine_gaussian(const Eigen::MatrixXd& a, const Eigen::VectorXd& mx,
                                     const Eigen::MatrixXd& px, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& mw, const Eigen::MatrixXd& q,
                                     const Eigen::VectorXd& c) {
  AffineMoments out;
  out.mean = a * mx + b * mw + c;
  out.cov = a * px * a.transpose() + b * q * b.transpose();
  return out;
}

inline Eigen::VectorXd sample_mean(const std::vector<Eigen::VectorXd>& xs) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(xs.front().size());
  for (const auto& x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

inline Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& xs) {
  const Eigen::VectorXd m = sample_mean(xs);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m.size(), m.size());
  for (const auto& x : xs) c += (x - m) * (x - m).transpose();
  return c / static_cast<double>(xs.size() - 1);
}

// Deterministic low-quality LCG for test point generation; independent of the
// library's RNG on purpose.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : s_(seed * 2862933555777941757ULL + 3037000493ULL) {}
  double uniform(double lo, double hi) {
    s_ = s_ * 6364136223846793005ULL + 1442695040888963407ULL;
    const double u = static_cast<double>(s_ >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::uint64_t s_;
};

}  // namespace oracle
