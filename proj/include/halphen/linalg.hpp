#pragma once

#include <Eigen/Dense>

#include "halphen/types.hpp"

namespace halphen {

inline Mat2 pauli1() {
  Mat2 s;
  s << 0, 1, 1, 0;
  return s;
}

inline Mat2 pauli2() {
  Mat2 s;
  s << 0, Complex(0, -1), Complex(0, 1), 0;
  return s;
}

inline Mat2 pauli3() {
  Mat2 s;
  s << 1, 0, 0, -1;
  return s;
}

/// Adjugate of a 3x3 matrix by cofactors, so adj(M)*M = det(M)*I also
/// holds for singular M.
inline Mat3 adjugate(const Mat3& m) {
  Mat3 adj;
  auto cof = [&m](int i, int j) {
    const int r0 = (i + 1) % 3, r1 = (i + 2) % 3;
    const int c0 = (j + 1) % 3, c1 = (j + 2) % 3;
    return m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
  };
  // adj(M)_{ij} = cofactor_{ji}; the cyclic index choice absorbs the sign.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) adj(i, j) = cof(j, i);
  return adj;
}

template <typename Derived>
auto commutator(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  return (a * b - b * a).eval();
}

/// Runtime-sized overload; mixed dimensions raise instead of asserting.
inline Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionMismatch("commutator: matrices must be square and of equal size");
  return a * b - b * a;
}

}  // namespace halphen
