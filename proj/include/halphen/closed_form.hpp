#pragma once

#include <vector>

#include "halphen/flows.hpp"
#include "halphen/fuchsian.hpp"
#include "halphen/types.hpp"

namespace halphen {

/// Unit-determinant Moebius transform of the theta argument; fields are
/// prefixed to avoid collision with the Halphen parameters a, b, c.
struct Mobius {
  Complex ma{1.0, 0.0}, mb{0.0, 0.0}, mc{0.0, 0.0}, md{1.0, 0.0};
};

void validate_mobius(const Mobius& m);

/// Theta-constant solution of the pairwise-sum system:
///   X = 2 d/dt log[theta2(0, (ma t+mb)/(mc t+md)) (mc t+md)^{-1/2}]
/// (cyclic with theta3, theta4). The logarithmic derivative is expanded
/// analytically, so no fractional power is ever evaluated.
Hal1State hal1_theta_solution(const Mobius& m, const Complex& t);

/// y = 4 d/dt log[theta1'(0, (ma t+mb)/(mc t+md)) (mc t+md)^{-3/2}], with
/// y' and y'' from term-wise differentiated series.
ChazyState chazy_theta_solution(const Mobius& m, const Complex& t);

/// Which combination y = c1*y1 + c2*y2 feeds the logarithmic derivatives.
/// The ratio is always t = y1/y2; only the denominator solution (c1=0)
/// makes all three components share one quadratic form, which the
/// residual oracle confirms.
struct SolutionChoice {
  Complex c1{0.0, 0.0};
  Complex c2{1.0, 0.0};
};

struct ParametricSample {
  double s = 0.0;  // path parameter along the z-path
  Complex z;
  Complex t;
  Hal2State state;
};

/// Solution of the second Halphen system parametrized by the ratio
/// t = y1/y2 of Fuchsian solutions along a z-path:
///   x1 = d/dt log y, x2 = d/dt log(y/z), x3 = d/dt log(y/(z-1)).
class ParametricHal2Solution {
 public:
  ParametricHal2Solution(HalphenABC abc, FuchsianBasis basis, SolutionChoice choice,
                         std::vector<ParametricSample> samples);

  const std::vector<ParametricSample>& samples() const { return samples_; }
  const FuchsianBasis& basis() const { return basis_; }
  const HalphenABC& abc() const { return abc_; }

  /// Dense evaluation at any path parameter through the basis interpolant.
  ParametricSample at(double s) const;
  Complex dt_dz_at(double s) const;
  double total_length() const { return basis_.total_length(); }

 private:
  HalphenABC abc_;
  FuchsianBasis basis_;
  SolutionChoice choice_;
  std::vector<ParametricSample> samples_;
};

/// Integrates the Fuchsian basis with initial data y1: (0,1), y2: (1,0)
/// at the path start (so t starts at 0 with dt/dz = 1) and assembles the
/// parametric solution. The z-path must avoid 0, 1 and zeros of the
/// denominator solution.
ParametricHal2Solution hal2_hypergeom_solution(const HalphenABC& p, const PathSpec& z_path,
                                               const SolutionChoice& choice = {},
                                               double tol = 1e-12);

/// Max over interior probes of |dx_j/dt - Q(x_j)| with dx_j/dt formed by
/// finite differences through the parametrization (FD in the path
/// parameter of both x_j and t).
double hal2_parametrization_residual(const ParametricHal2Solution& sol, int n_probes = 7);

}  // namespace halphen
