#pragma once

#include <array>

#include "halphen/types.hpp"

namespace halphen {

/// Argument of the theta-constant series; valid only on the upper half
/// plane (nome |q| < 1).
struct ThetaArg {
  Complex tau;
};

/// q-series evaluation of the theta constant theta_kind(0, tau) for
/// kind in {2,3,4}, differentiated deriv_order times in tau (term-wise).
/// Every term is written as exp(i*pi*tau*e) with rational exponent e, so
/// the theta2 prefactor q^{1/4} carries no branch ambiguity.
Complex theta_series(int kind, const Complex& tau, int deriv_order);

/// Same series machinery for theta1'(0, tau) = 2 Sum (-1)^n (2n+1) q^{(n+1/2)^2}.
Complex theta1_prime_series(const Complex& tau, int deriv_order);

inline Complex theta_const(int kind, const ThetaArg& arg) {
  return theta_series(kind, arg.tau, 0);
}

inline Complex theta_tau_deriv(int kind, const ThetaArg& arg) {
  return theta_series(kind, arg.tau, 1);
}

struct Theta1Prime {
  Complex value;
  Complex tau_derivative;
};

inline Theta1Prime theta1_prime(const ThetaArg& arg) {
  return {theta1_prime_series(arg.tau, 0), theta1_prime_series(arg.tau, 1)};
}

/// theta1'(0, tau) and its first three tau-derivatives.
inline std::array<Complex, 4> theta1_prime_derivs(const ThetaArg& arg) {
  return {theta1_prime_series(arg.tau, 0), theta1_prime_series(arg.tau, 1),
          theta1_prime_series(arg.tau, 2), theta1_prime_series(arg.tau, 3)};
}

}  // namespace halphen
