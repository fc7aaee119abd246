#include "halphen/theta.hpp"

#include <cmath>
#include <numbers>

namespace halphen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxTerms = 500;
constexpr double kRelCutoff = 1e-16;

void check_domain(const Complex& tau) {
  require_finite(tau, "theta tau");
  if (!(tau.imag() > 0.0)) throw DomainError("theta: Im(tau) must be positive");
}

// One series term: coeff * exp(i*pi*tau*expo), differentiated deriv_order
// times in tau.
Complex term(const Complex& tau, double coeff, double expo, int deriv_order) {
  Complex v = coeff * std::exp(kImag * kPi * tau * expo);
  for (int d = 0; d < deriv_order; ++d) v *= kImag * kPi * expo;
  return v;
}

}  // namespace

Complex theta_series(int kind, const Complex& tau, int deriv_order) {
  check_domain(tau);
  Complex sum = 0.0;
  if (kind == 3 || kind == 4) {
    if (deriv_order == 0) sum = 1.0;
    for (int n = 1; n <= kMaxTerms; ++n) {
      const double sign = (kind == 4 && n % 2 == 1) ? -1.0 : 1.0;
      const Complex t = term(tau, 2.0 * sign, double(n) * n, deriv_order);
      sum += t;
      if (std::abs(t) < kRelCutoff * (1.0 + std::abs(sum))) return sum;
    }
  } else if (kind == 2) {
    for (int n = 0; n <= kMaxTerms; ++n) {
      const double e = (n + 0.5) * (n + 0.5);
      const Complex t = term(tau, 2.0, e, deriv_order);
      sum += t;
      if (std::abs(t) < kRelCutoff * (1.0 + std::abs(sum))) return sum;
    }
  } else {
    throw DomainError("theta_series: kind must be 2, 3 or 4");
  }
  throw ConvergenceFailure("theta_series: truncation rule not met within 500 terms");
}

Complex theta1_prime_series(const Complex& tau, int deriv_order) {
  check_domain(tau);
  Complex sum = 0.0;
  for (int n = 0; n <= kMaxTerms; ++n) {
    const double sign = (n % 2 == 1) ? -1.0 : 1.0;
    const double e = (n + 0.5) * (n + 0.5);
    const Complex t = term(tau, 2.0 * sign * (2 * n + 1), e, deriv_order);
    sum += t;
    if (std::abs(t) < kRelCutoff * (1.0 + std::abs(sum))) return sum;
  }
  throw ConvergenceFailure("theta1_prime_series: truncation rule not met within 500 terms");
}

}  // namespace halphen
