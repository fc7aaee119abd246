#pragma once

#include "halphen/flows.hpp"
#include "halphen/types.hpp"

namespace halphen {

/// Paired parameter sets related by the alpha <-> (a,b,c) map; carries both
/// directions of one consistent record.
struct ParamMapRecord {
  AlphaParams alphas;
  HalphenABC abc;
};

/// 8a = a1^2 + a2^2 - a3^2 - 1 (cyclic pattern with alternating signs).
inline HalphenABC alphas_to_abc(const AlphaParams& p) {
  const Complex s1 = p.alpha1 * p.alpha1, s2 = p.alpha2 * p.alpha2, s3 = p.alpha3 * p.alpha3;
  return {(s1 + s2 - s3 - 1.0) / 8.0, (-s1 + s2 + s3 - 1.0) / 8.0, (s1 - s2 + s3 - 1.0) / 8.0};
}

struct BranchSelection {
  int b1 = +1, b2 = +1, b3 = +1;
};

/// Linear solve for the alpha squares (a1^2 = 4(c+a)+1 etc.), then the
/// principal square root unless the branch selection flips a component.
inline AlphaParams abc_to_alphas(const HalphenABC& p, const BranchSelection& branch = {}) {
  const Complex s1 = 4.0 * (p.c + p.a) + 1.0;
  const Complex s2 = 4.0 * (p.a + p.b) + 1.0;
  const Complex s3 = 4.0 * (p.b + p.c) + 1.0;
  return {double(branch.b1) * std::sqrt(s1), double(branch.b2) * std::sqrt(s2),
          double(branch.b3) * std::sqrt(s3)};
}

/// 2X = x2+x3, 2Y = x3+x1, 2Z = x1+x2. Intended for a=b=c=-1/8
/// trajectories; the map itself is defined for any state.
inline Hal1State hal2_to_hal1_state(const Hal2State& s) {
  return {0.5 * (s.x2 + s.x3), 0.5 * (s.x3 + s.x1), 0.5 * (s.x1 + s.x2)};
}

/// Linear inverse of hal2_to_hal1_state: x1 = Y+Z-X (cyclic).
inline Hal2State hal1_to_hal2_state(const Hal1State& s) {
  return {s.Y + s.Z - s.X, s.Z + s.X - s.Y, s.X + s.Y - s.Z};
}

/// y = 2(X+Y+Z) with y', y'' obtained by differentiating through the
/// quadratic field (no finite differences).
inline ChazyState hal1_to_chazy(const Hal1State& s) {
  const Hal1State d = hal1_field(s);
  const Complex y = 2.0 * (s.X + s.Y + s.Z);
  const Complex y1 = 2.0 * (d.X + d.Y + d.Z);  // = 2(XY+YZ+ZX)
  const Complex y2 =
      2.0 * (d.X * (s.Y + s.Z) + d.Y * (s.Z + s.X) + d.Z * (s.X + s.Y));
  return {y, y1, y2};
}

/// The displayed correspondence is 2 w1 = -x2-x3 (cyclic); this is its
/// linear inverse, x_j = 2 w_j - (w1+w2+w3).
inline Hal2State ach_state_to_hal2_state(const AchState& s) {
  const Complex sum = s.w1 + s.w2 + s.w3;
  return {2.0 * s.w1 - sum, 2.0 * s.w2 - sum, 2.0 * s.w3 - sum};
}

inline AchState hal2_state_to_ach_state(const Hal2State& s) {
  return {-0.5 * (s.x2 + s.x3), -0.5 * (s.x3 + s.x1), -0.5 * (s.x1 + s.x2)};
}

inline Mat3State embed_diag_dh9(const Complex& w1, const Complex& w2, const Complex& w3) {
  Mat3State s;
  s.m.setZero();
  s.m(0, 0) = w1;
  s.m(1, 1) = w2;
  s.m(2, 2) = w3;
  return s;
}

inline Mat3State embed_block_dh9(const DhvState& s) {
  Mat3State r;
  r.m.setZero();
  r.m(0, 0) = s.w1;
  r.m(0, 1) = s.theta;
  r.m(1, 0) = s.phi;
  r.m(1, 1) = s.w2;
  r.m(2, 2) = s.w3;
  return r;
}

/// The diagonal matrix flow gives w' = w2 w3 - w1(w2+w3) (cyclic), which
/// matches the pairwise-sum system under a global sign flip. That sign map
/// is recorded here as the documented equivalence.
inline Hal1State dh9_diag_to_hal1(const Complex& w1, const Complex& w2, const Complex& w3) {
  return {-w1, -w2, -w3};
}

}  // namespace halphen
