#pragma once

#include "halphen/integrate.hpp"
#include "halphen/linalg.hpp"
#include "halphen/types.hpp"

namespace halphen {

struct Hal1State {
  Complex X, Y, Z;
};

struct Hal2State {
  Complex x1, x2, x3;
};

struct HalphenABC {
  Complex a, b, c;
};

/// y and its first two derivatives, so the third-order scalar equation
/// integrates as a first-order system.
struct ChazyState {
  Complex y, y1, y2;
};

struct DhvState {
  Complex w1, w2, w3, phi, theta;
};

struct AchState {
  Complex w1, w2, w3;
};

struct AlphaParams {
  Complex alpha1, alpha2, alpha3;
};

struct Mat3State {
  Mat3 m;
};

// -------- vector fields (solved explicit-derivative form) --------

/// Unique solved form of the pairwise-sum system X'+Y' = 2XY (cyclic).
inline Hal1State hal1_field(const Hal1State& s) {
  return {s.X * s.Y + s.Z * s.X - s.Y * s.Z,
          s.X * s.Y + s.Y * s.Z - s.Z * s.X,
          s.Y * s.Z + s.Z * s.X - s.X * s.Y};
}

/// The quadratic form shared by all three components of the second
/// Halphen system: Q(x) = x^2 + a(x1-x2)^2 + b(x2-x3)^2 + c(x3-x1)^2.
inline Complex hal2_common_term(const Hal2State& s, const HalphenABC& p) {
  const Complex d12 = s.x1 - s.x2, d23 = s.x2 - s.x3, d31 = s.x3 - s.x1;
  return p.a * d12 * d12 + p.b * d23 * d23 + p.c * d31 * d31;
}

inline Complex hal2_q(const Complex& x, const Hal2State& s, const HalphenABC& p) {
  return x * x + hal2_common_term(s, p);
}

inline Hal2State hal2_field(const Hal2State& s, const HalphenABC& p) {
  const Complex m = hal2_common_term(s, p);
  return {s.x1 * s.x1 + m, s.x2 * s.x2 + m, s.x3 * s.x3 + m};
}

/// y''' = 2 y y'' - 3 (y')^2.
inline ChazyState chazy_field(const ChazyState& s) {
  return {s.y1, s.y2, 2.0 * s.y * s.y2 - 3.0 * s.y1 * s.y1};
}

/// Fifth-order Darboux-Halphen field. The w3 line follows the cyclic
/// pattern w3' = w1 w2 - w3(w1+w2) - phi*theta; statements of the system
/// sometimes repeat the w2 line there, but the block embedding into the
/// ninth-order matrix flow (see dh9_field) fixes the cyclic form.
inline DhvState dhv_field(const DhvState& s) {
  return {s.w2 * s.w3 - s.w1 * (s.w2 + s.w3) + s.phi * s.phi,
          s.w3 * s.w1 - s.w2 * (s.w3 + s.w1) + s.theta * s.theta,
          s.w1 * s.w2 - s.w3 * (s.w1 + s.w2) - s.phi * s.theta,
          s.w1 * (s.theta - s.phi) - s.w3 * (s.theta + s.phi),
          -s.w2 * (s.theta - s.phi) - s.w3 * (s.theta + s.phi)};
}

inline Complex ach_tau_sq(const AchState& s, const AlphaParams& p) {
  const Complex d12 = s.w1 - s.w2, d23 = s.w2 - s.w3, d31 = s.w3 - s.w1;
  return p.alpha1 * p.alpha1 * d12 * d31 + p.alpha2 * p.alpha2 * d23 * d12 +
         p.alpha3 * p.alpha3 * d31 * d23;
}

/// Third-order reduction with the anisotropy term tau^2; the w3 line is
/// the cyclic one (same note as for dhv_field).
inline AchState ach_field(const AchState& s, const AlphaParams& p) {
  const Complex t2 = ach_tau_sq(s, p);
  return {s.w2 * s.w3 - s.w1 * (s.w2 + s.w3) + t2,
          s.w3 * s.w1 - s.w2 * (s.w3 + s.w1) + t2,
          s.w1 * s.w2 - s.w3 * (s.w1 + s.w2) + t2};
}

/// Ninth-order Darboux-Halphen matrix flow
///   dM/dt = adj(M)^T + M^T M - tr(M) M,
/// with the transpose applied to the cofactor adjugate: the only reading
/// whose diagonal reduction reproduces the classical third-order system.
inline Mat3State dh9_field(const Mat3State& s) {
  const Mat3& m = s.m;
  return {Mat3(adjugate(m).transpose() + m.transpose() * m - m.trace() * m)};
}

// -------- integrator adapters --------

inline Vec to_vec(const Hal1State& s) { return Vec{{s.X, s.Y, s.Z}}; }
inline Hal1State hal1_from_vec(const Vec& v) { return {v[0], v[1], v[2]}; }

inline Vec to_vec(const Hal2State& s) { return Vec{{s.x1, s.x2, s.x3}}; }
inline Hal2State hal2_from_vec(const Vec& v) { return {v[0], v[1], v[2]}; }

inline Vec to_vec(const ChazyState& s) { return Vec{{s.y, s.y1, s.y2}}; }
inline ChazyState chazy_from_vec(const Vec& v) { return {v[0], v[1], v[2]}; }

inline Vec to_vec(const DhvState& s) { return Vec{{s.w1, s.w2, s.w3, s.phi, s.theta}}; }
inline DhvState dhv_from_vec(const Vec& v) { return {v[0], v[1], v[2], v[3], v[4]}; }

inline Vec to_vec(const AchState& s) { return Vec{{s.w1, s.w2, s.w3}}; }
inline AchState ach_from_vec(const Vec& v) { return {v[0], v[1], v[2]}; }

inline Vec to_vec(const Mat3State& s) {
  Vec v(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) v[3 * i + j] = s.m(i, j);
  return v;
}
inline Mat3State mat3_from_vec(const Vec& v) {
  Mat3State s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.m(i, j) = v[3 * i + j];
  return s;
}

inline FieldFn hal1_field_fn() {
  return [](const Complex&, const Vec& v) { return to_vec(hal1_field(hal1_from_vec(v))); };
}

inline FieldFn hal2_field_fn(const HalphenABC& p) {
  return [p](const Complex&, const Vec& v) { return to_vec(hal2_field(hal2_from_vec(v), p)); };
}

inline FieldFn chazy_field_fn() {
  return [](const Complex&, const Vec& v) { return to_vec(chazy_field(chazy_from_vec(v))); };
}

inline FieldFn dhv_field_fn() {
  return [](const Complex&, const Vec& v) { return to_vec(dhv_field(dhv_from_vec(v))); };
}

inline FieldFn ach_field_fn(const AlphaParams& p) {
  return [p](const Complex&, const Vec& v) { return to_vec(ach_field(ach_from_vec(v), p)); };
}

inline FieldFn dh9_field_fn() {
  return [](const Complex&, const Vec& v) { return to_vec(dh9_field(mat3_from_vec(v))); };
}

}  // namespace halphen
