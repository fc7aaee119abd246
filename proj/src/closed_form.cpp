#include "halphen/closed_form.hpp"

#include <cmath>

#include "halphen/theta.hpp"

namespace halphen {

void validate_mobius(const Mobius& m) {
  require_finite(m.ma, "Mobius ma");
  require_finite(m.mb, "Mobius mb");
  require_finite(m.mc, "Mobius mc");
  require_finite(m.md, "Mobius md");
  if (std::abs(m.ma * m.md - m.mb * m.mc - 1.0) > 1e-12)
    throw DomainError("Mobius: determinant must equal 1");
}

namespace {

struct MobiusAt {
  Complex tau;        // (ma t + mb)/(mc t + md)
  Complex dtau;       // 1/(mc t + md)^2
  Complex cot;        // mc/(mc t + md)
  Complex denom;
};

MobiusAt mobius_at(const Mobius& m, const Complex& t) {
  validate_mobius(m);
  require_finite(t, "theta solution t");
  const Complex denom = m.mc * t + m.md;
  if (std::abs(denom) < 1e-12 * (1.0 + std::abs(m.mc * t)))
    throw PoleError("theta solution: mc t + md vanishes");
  MobiusAt r;
  r.denom = denom;
  r.tau = (m.ma * t + m.mb) / denom;
  r.dtau = 1.0 / (denom * denom);
  r.cot = m.mc / denom;
  if (!(r.tau.imag() > 0.0))
    throw DomainError("theta solution: transformed tau must lie in the upper half plane");
  return r;
}

}  // namespace

Hal1State hal1_theta_solution(const Mobius& m, const Complex& t) {
  const MobiusAt mb = mobius_at(m, t);
  auto comp = [&](int kind) {
    const Complex v = theta_series(kind, mb.tau, 0);
    const Complex dv = theta_series(kind, mb.tau, 1);
    return 2.0 * (dv / v) * mb.dtau - mb.cot;
  };
  return {comp(2), comp(3), comp(4)};
}

ChazyState chazy_theta_solution(const Mobius& m, const Complex& t) {
  const MobiusAt mb = mobius_at(m, t);
  const auto u = theta1_prime_derivs(ThetaArg{mb.tau});
  // Logarithmic derivatives of theta1' in tau.
  const Complex g = u[1] / u[0];
  const Complex g1 = u[2] / u[0] - g * g;
  const Complex g2 = u[3] / u[0] - 3.0 * u[2] * u[1] / (u[0] * u[0]) + 2.0 * g * g * g;

  const Complex s1 = mb.dtau;                       // dtau/dt
  const Complex s2 = -2.0 * m.mc * mb.dtau / mb.denom;   // d2tau/dt2
  const Complex s3 = 6.0 * m.mc * m.mc * mb.dtau / (mb.denom * mb.denom);

  const Complex y = 4.0 * g * s1 - 6.0 * mb.cot;
  const Complex y1 = 4.0 * (g1 * s1 * s1 + g * s2) + 6.0 * mb.cot * mb.cot;
  const Complex y2 = 4.0 * (g2 * s1 * s1 * s1 + 3.0 * g1 * s1 * s2 + g * s3) -
                     12.0 * mb.cot * mb.cot * mb.cot;
  return {y, y1, y2};
}

ParametricHal2Solution::ParametricHal2Solution(HalphenABC abc, FuchsianBasis basis,
                                               SolutionChoice choice,
                                               std::vector<ParametricSample> samples)
    : abc_(abc), basis_(std::move(basis)), choice_(choice), samples_(std::move(samples)) {
  for (std::size_t k = 1; k < samples_.size(); ++k) {
    if (samples_[k].t == samples_[k - 1].t)
      throw StationaryRatio("hal2_hypergeom_solution: ratio map stalls along the path");
  }
}

namespace {

ParametricSample assemble_sample(const FuchsianPoint& pt, const Complex& w,
                                 const SolutionChoice& choice, double s) {
  const double scale = std::abs(pt.y1) + std::abs(pt.y2) + 1.0;
  if (std::abs(pt.y2) < 1e-12 * scale)
    throw StationaryRatio("hal2_hypergeom_solution: denominator solution vanishes on the path");
  const Complex dt_dz = w / (pt.y2 * pt.y2);
  if (std::abs(dt_dz) < 1e-12)
    throw StationaryRatio("hal2_hypergeom_solution: dt/dz below 1e-12");
  const Complex y = choice.c1 * pt.y1 + choice.c2 * pt.y2;
  const Complex dy = choice.c1 * pt.dy1 + choice.c2 * pt.dy2;
  const Complex dz_dt = 1.0 / dt_dz;
  const Complex x1 = (dy / y) * dz_dt;
  const Complex x2 = x1 - (1.0 / pt.z) * dz_dt;
  const Complex x3 = x1 - (1.0 / (pt.z - 1.0)) * dz_dt;
  return {s, pt.z, pt.y1 / pt.y2, Hal2State{x1, x2, x3}};
}

}  // namespace

ParametricSample ParametricHal2Solution::at(double s) const {
  return assemble_sample(basis_.at(s), basis_.wronskian(), choice_, s);
}

Complex ParametricHal2Solution::dt_dz_at(double s) const {
  const FuchsianPoint pt = basis_.at(s);
  return basis_.wronskian() / (pt.y2 * pt.y2);
}

ParametricHal2Solution hal2_hypergeom_solution(const HalphenABC& p, const PathSpec& z_path,
                                               const SolutionChoice& choice, double tol) {
  FuchsianInit init;
  init.y1 = 0.0;
  init.dy1 = 1.0;
  init.y2 = 1.0;
  init.dy2 = 0.0;
  FuchsianBasis basis = fuchsian_pair(FuchsianParams{p.a, p.b, p.c}, z_path, init, tol);

  std::vector<ParametricSample> samples;
  samples.reserve(basis.trajectory().samples().size());
  for (const auto& smp : basis.trajectory().samples())
    samples.push_back(assemble_sample(FuchsianPoint{smp.t, smp.y[0], smp.y[1], smp.y[2], smp.y[3]},
                                      basis.wronskian(), choice, smp.s));
  return ParametricHal2Solution(p, std::move(basis), choice, std::move(samples));
}

double hal2_parametrization_residual(const ParametricHal2Solution& sol, int n_probes) {
  const double L = sol.total_length();
  const double h = std::min(0.01 * L, 0.01);
  const PathSpec& zpath = sol.basis().trajectory().path();
  double worst = 0.0;
  for (int k = 0; k < n_probes; ++k) {
    const double s0 = zpath.clamp_to_segment_interior(
        L * (0.1 + 0.8 * double(k) / std::max(1, n_probes - 1)), 2.0 * h);
    const Complex dt_ds = fd_derivative(
        [&](const Complex& sc) { return sol.at(sc.real()).t; }, Complex(s0, 0.0), h);
    const ParametricSample base = sol.at(s0);
    const Complex q_common = hal2_q(Complex(0.0, 0.0), base.state, sol.abc());
    const std::array<Complex, 3> xs = {base.state.x1, base.state.x2, base.state.x3};
    for (int j = 0; j < 3; ++j) {
      const Complex dx_ds = fd_derivative(
          [&](const Complex& sc) {
            const ParametricSample ps = sol.at(sc.real());
            return j == 0 ? ps.state.x1 : j == 1 ? ps.state.x2 : ps.state.x3;
          },
          Complex(s0, 0.0), h);
      const Complex dx_dt = dx_ds / dt_ds;
      worst = std::max(worst, std::abs(dx_dt - (xs[j] * xs[j] + q_common)));
    }
  }
  return worst;
}

}  // namespace halphen
