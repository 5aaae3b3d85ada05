#pragma once
// Shared numeric utilities: inverse error function, guarded Cholesky,
// PSD square roots, angle normalization, deterministic sampling streams.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ucover {

inline constexpr double kPi = 3.14159265358979323846;

// 99.9% quantile of the chi-square distribution with 3 degrees of freedom,
// used for confidence-ellipsoid axis scaling.
inline constexpr double kChi3Quantile999 = 16.266236196238129;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;  // keep in-range values bit-exact
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

namespace detail {

// Rational approximation of the standard normal quantile (Acklam's
// coefficients; relative error below 1.2e-9 on (0,1)).
inline double norm_quantile_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

// Inverse of erf on (-1, 1): rational initial guess refined by two Newton
// steps on erf itself.  Absolute error below 1e-12 away from the endpoint
// singularities (|x| <= 1 - 1e-9).
inline double erf_inv(double x) {
  if (!(x > -1.0 && x < 1.0)) {
    throw std::domain_error("erf_inv: argument must lie in (-1, 1)");
  }
  if (x == 0.0) return 0.0;
  double y = detail::norm_quantile_approx(0.5 * (x + 1.0)) / std::sqrt(2.0);
  const double two_over_sqrt_pi = 1.1283791670955126;
  for (int it = 0; it < 2; ++it) {
    const double err = std::erf(y) - x;
    y -= err / (two_over_sqrt_pi * std::exp(-y * y));
  }
  return y;
}

// Lower-triangular Cholesky factor of a symmetric PSD matrix.  On failure a
// diagonal jitter is added, growing one decade per retry from 1e-12 to 1e-6
// (7 attempts), before giving up.
inline Eigen::MatrixXd cholesky_psd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  for (double jitter = 1e-12; jitter < 1.5e-6; jitter *= 10.0) {
    Eigen::MatrixXd jittered = m;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error("cholesky_psd: covariance not PSD");
}

// Symmetric PSD square root via eigendecomposition.  Tolerates semidefinite
// input; eigenvalues below -tol*scale are rejected, small negatives clamped.
inline Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m, double tol = 1e-9) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("sqrt_psd: eigendecomposition failed");
  }
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol * scale) {
      throw std::runtime_error("sqrt_psd: matrix has a negative eigenvalue");
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// SplitMix64 step; a strong 64-bit mixer used both as a tiny PRNG and as a
// seed-derivation hash.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (base, index); used so parallel
// rollouts and multistarts get decorrelated, platform-stable streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0xd1342543de82ef95ULL * (index + 1));
  return splitmix64(s);
}

// Deterministic standard-normal stream: SplitMix64 uniforms fed through the
// Box-Muller transform.  Self-contained on purpose — std::normal_distribution
// is implementation-defined, which would break byte-stable outputs.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : state_(seed) {}

  // Uniform draw in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
  }

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log() finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ucover
