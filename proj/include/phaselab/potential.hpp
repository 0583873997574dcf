#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace phaselab {

inline constexpr double kSqrt2 = 1.4142135623730950488016887;

// Quartic double well W(u) = (1 - u^2)^2 / 4, minima at u = +-1, W''(+-1) = 2.
// The well is fixed: the normalisation sigma_{n-1}, the sqrt(2) decay rates and
// the linearised kink spectrum {0, 3/2} all hinge on this exact form.
template <typename Scalar, typename = std::enable_if_t<std::is_arithmetic_v<Scalar>>>
constexpr Scalar well(Scalar u) {
  const Scalar q = Scalar(1) - u * u;
  return Scalar(0.25) * q * q;
}

template <typename Scalar, typename = std::enable_if_t<std::is_arithmetic_v<Scalar>>>
constexpr Scalar well_slope(Scalar u) {  // W'(u) = u^3 - u
  return u * u * u - u;
}

template <typename Scalar, typename = std::enable_if_t<std::is_arithmetic_v<Scalar>>>
constexpr Scalar well_curvature(Scalar u) {  // W''(u) = 3u^2 - 1
  return Scalar(3) * u * u - Scalar(1);
}

// Eigen expression overloads, so fields can be fed through without loops.
template <typename Derived>
auto well(const Eigen::ArrayBase<Derived>& u) {
  return 0.25 * (1.0 - u.square()).square();
}

template <typename Derived>
auto well_slope(const Eigen::ArrayBase<Derived>& u) {
  return u.cube() - u;
}

template <typename Derived>
auto well_curvature(const Eigen::ArrayBase<Derived>& u) {
  return 3.0 * u.square() - 1.0;
}

struct WellEval {
  double value;      // W(u)
  double slope;      // W'(u)
  double curvature;  // W''(u)
};

inline WellEval well_eval(double u) {
  return {well(u), well_slope(u), well_curvature(u)};
}

// Monotone 1D heteroclinic g(x) = tanh((x - shift)/sqrt(2)), the unique (up to
// translation and sign) bounded solution of g'' = W'(g) connecting the wells.
// `orientation` flips the profile; all derivatives are analytic.
struct KinkProfile {
  double shift = 0.0;
  double orientation = 1.0;  // +1 or -1
};

struct KinkEval {
  double value;   // g
  double slope;   // g'
  double second;  // g''
};

inline KinkEval kink_eval(double x, const KinkProfile& profile = {}) {
  const double z = (x - profile.shift) / kSqrt2;
  const double t = std::tanh(z);
  const double s2 = 1.0 - t * t;  // sech^2
  return {profile.orientation * t,
          profile.orientation * s2 / kSqrt2,
          -profile.orientation * s2 * t};
}

// integral over [-1,1] of sqrt(2 W(s)) ds, evaluated by composite Gauss-Legendre.
// Exact value is 2*sqrt(2)/3; the quadrature is kept so the normalisation is
// produced the same way for any sampled profile cross-check.
inline double heteroclinic_mass() {
  // 8-point Gauss-Legendre nodes/weights on [-1,1].
  static const double xg[8] = {
      -0.9602898564975362, -0.7966664774136267, -0.5255324099163290,
      -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
      0.7966664774136267,  0.9602898564975362};
  static const double wg[8] = {
      0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
      0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
      0.2223810344533745, 0.1012285362903763};
  const int panels = 16;
  const double a = -1.0, b = 1.0;
  const double hp = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * hp;
    for (int i = 0; i < 8; ++i) {
      const double s = mid + 0.5 * hp * xg[i];
      sum += 0.5 * hp * wg[i] * std::sqrt(2.0 * well(s));
    }
  }
  return sum;
}

// Volume of the unit ball in R^m (m = 0 gives 1).
inline double unit_ball_volume(int m) {
  if (m < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
  return std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

// sigma_{n-1} = omega_{n-1} * integral sqrt(2W); the per-area cost of one flat
// transition layer, used to normalise every energy in the library.
inline double layer_normalisation(int n) {
  return unit_ball_volume(n - 1) * heteroclinic_mass();
}

// C^2 cutoff: 1 on [-1,1], 0 outside (-2,2), quintic-smoothstep flanks.
// max|zeta'| = 1.875 and max|zeta''| ~ 5.78, so |zeta'| + |zeta''| <= 16.
inline double cutoff(double s) {
  const double a = std::abs(s);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  const double x = a - 1.0;
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

inline double cutoff_d1(double s) {
  const double a = std::abs(s);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double x = a - 1.0;
  const double d = -30.0 * x * x * (1.0 - x) * (1.0 - x);
  return s > 0 ? d : -d;
}

inline double cutoff_d2(double s) {
  const double a = std::abs(s);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double x = a - 1.0;
  return -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}

// Truncated kink gbar(t) = zeta(t/w) g(t) + (1 - zeta(t/w)) sgn(t) for a
// truncation window w: identical to g for |t| <= w, exactly +-1 for |t| >= 2w.
// The defect xi = gbar'' - W'(gbar) is supported in the blend zone w < |t| < 2w.
struct TruncatedKinkEval {
  double value;   // gbar
  double defect;  // xi = gbar'' - W'(gbar)
};

inline TruncatedKinkEval truncated_kink_eval(double t, double window) {
  if (!(window > 0.0))
    throw std::invalid_argument("truncated_kink_eval: window must be positive");
  const double s = t / window;
  const double z = cutoff(s);
  if (z >= 1.0) {
    const KinkEval k = kink_eval(t);
    return {k.value, 0.0};  // g'' - W'(g) = 0 identically
  }
  const double sgn = t >= 0 ? 1.0 : -1.0;
  if (z <= 0.0) return {sgn, 0.0};  // W'(+-1) = 0
  const KinkEval k = kink_eval(t);
  const double z1 = cutoff_d1(s) / window;
  const double z2 = cutoff_d2(s) / (window * window);
  const double gbar = z * k.value + (1.0 - z) * sgn;
  const double gbar2 = z2 * (k.value - sgn) + 2.0 * z1 * k.slope + z * k.second;
  return {gbar, gbar2 - well_slope(gbar)};
}

}  // namespace phaselab
