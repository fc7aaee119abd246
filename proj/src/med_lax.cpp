#include "halphen/med_lax.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace halphen {

namespace {

constexpr double kPoleMargin = 1e-3;

std::array<Complex, 3> state_array(const Hal2State& s) { return {s.x1, s.x2, s.x3}; }

void require_distinct(const std::array<Complex, 3>& x) {
  const double scale = 1.0 + std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])});
  for (int j = 0; j < 3; ++j)
    for (int m = j + 1; m < 3; ++m)
      if (std::abs(x[j] - x[m]) < 1e-12 * scale)
        throw SingularEvaluation("hal2 Lax data: coincident singular points x_j");
}

Complex pole_product(const std::array<Complex, 3>& x, int j) {
  Complex prod = 1.0;
  for (int m = 0; m < 3; ++m)
    if (m != j) prod *= x[j] - x[m];
  return prod;
}

double matrix_max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

struct ResidualParts {
  double full, scalar, traceless, comm;
};

// Zero-curvature residual of the hal2 pair at one (x, state, state') point.
ResidualParts med_residual_at(const Complex& x, const Hal2State& s, const Hal2State& sdot,
                              const MedParams& p, const HalphenABC& abc) {
  const auto xs = state_array(s);
  const std::array<Complex, 3> xd = {sdot.x1, sdot.x2, sdot.x3};
  const std::array<Complex, 3> cs = {p.c1, p.c2, p.c3};

  Complex P = 1.0;
  for (const auto& xj : xs) P *= x - xj;
  Complex Pprime = 0.0;  // sum over j of prod_{m != j}
  for (int j = 0; j < 3; ++j) {
    Complex prod = 1.0;
    for (int m = 0; m < 3; ++m)
      if (m != j) prod *= x - xs[m];
    Pprime += prod;
  }

  const Mat2 eye = Mat2::Identity();
  Mat2 a = (p.mu / P) * eye;
  Mat2 da_dx = (-p.mu * Pprime / (P * P)) * eye;
  Mat2 da_dt = Mat2::Zero();
  {
    Complex dinvP_dt = 0.0;
    for (int j = 0; j < 3; ++j) dinvP_dt += xd[j] / (x - xs[j]);
    da_dt += (p.mu * dinvP_dt / P) * eye;
  }
  Mat2 sum_cx_S = Mat2::Zero();
  for (int j = 0; j < 3; ++j) {
    const Complex dj = x - xs[j];
    a += (cs[j] / dj) * p.S;
    da_dx += (-cs[j] / (dj * dj)) * p.S;
    da_dt += (cs[j] * xd[j] / (dj * dj)) * p.S;
    sum_cx_S += (cs[j] * xs[j]) * p.S;
  }

  const Complex q = hal2_q(x, s, abc);
  const Mat2 btilde = sum_cx_S - q * a;
  const Mat2 dbtilde_dx = -2.0 * x * a - q * da_dx;
  const Complex dnu_dx = -(x + xs[0] + xs[1] + xs[2]) * p.mu / P;

  const Mat2 comm = commutator(a, btilde);
  const Mat2 r = da_dt - dbtilde_dx - dnu_dx * eye + comm;
  const Complex scalar = 0.5 * r.trace();
  const Mat2 traceless = r - scalar * eye;
  return {matrix_max_abs(r), std::abs(scalar), matrix_max_abs(traceless), matrix_max_abs(comm)};
}

std::vector<std::size_t> pick_sample_indices(const Trajectory& traj, int count) {
  const std::size_t n = traj.samples().size();
  if (count < 1 || n == 0) throw TrajectoryTooCoarse("residual grid: empty trajectory");
  std::vector<std::size_t> idx;
  if (std::size_t(count) >= n) {
    for (std::size_t k = 0; k < n; ++k) idx.push_back(k);
    return idx;
  }
  for (int k = 0; k < count; ++k)
    idx.push_back(std::size_t(std::llround(double(k) * double(n - 1) / double(count - 1))));
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace

void MedParams::validate() const {
  require_finite(mu, "MedParams mu");
  const double cscale = 1.0 + std::max({std::abs(c1), std::abs(c2), std::abs(c3)});
  if (std::abs(c1 + c2 + c3) > 1e-13 * cscale)
    throw DomainError("MedParams: c1+c2+c3 must vanish");
  if (std::abs(S.trace()) > 1e-13 * (1.0 + matrix_max_abs(S)))
    throw DomainError("MedParams: S must be traceless");
}

ExponentRecord exponent_record(int site, const Hal2State& s, const MedParams& p) {
  if (site < 1 || site > 3) throw DomainError("exponent_record: site must be 1..3");
  const auto xs = state_array(s);
  require_distinct(xs);
  const Complex c = site == 1 ? p.c1 : site == 2 ? p.c2 : p.c3;
  return {site, p.mu / pole_product(xs, site - 1), Mat2(c * p.S)};
}

LaxPairEval med_lax_eval(const Complex& x, const Hal2State& s, const MedParams& p,
                         const HalphenABC& abc) {
  p.validate();
  const auto xs = state_array(s);
  require_distinct(xs);
  for (const auto& xj : xs)
    if (std::abs(x - xj) < 1e-12 * (1.0 + std::abs(xj)))
      throw SingularEvaluation("med_lax_eval: x at a pole");

  Complex P = 1.0;
  for (const auto& xj : xs) P *= x - xj;
  const std::array<Complex, 3> cs = {p.c1, p.c2, p.c3};

  Mat2 a = (p.mu / P) * Mat2::Identity();
  Mat2 sum_cx_S = Mat2::Zero();
  for (int j = 0; j < 3; ++j) {
    a += (cs[j] / (x - xs[j])) * p.S;
    sum_cx_S += (cs[j] * xs[j]) * p.S;
  }
  const Mat2 btilde = sum_cx_S - hal2_q(x, s, abc) * a;
  const Complex dnu_dx = -(x + xs[0] + xs[1] + xs[2]) * p.mu / P;
  return {a, btilde, dnu_dx};
}

ResidualReport med_compatibility_residual(const Trajectory& traj, const MedParams& p,
                                          const HalphenABC& abc,
                                          const std::vector<Complex>& x_grid,
                                          int t_samples) {
  p.validate();
  if (traj.dim() != 3) throw DimensionMismatch("med_compatibility_residual: need a hal2 trajectory");

  ResidualReport rep;
  rep.kind = "med-lax";
  rep.x_grid = x_grid;

  for (const std::size_t k : pick_sample_indices(traj, t_samples)) {
    const auto& smp = traj.samples()[k];
    const Hal2State st = hal2_from_vec(smp.y);
    const Hal2State sd = hal2_from_vec(smp.dydt);
    const auto xs = state_array(st);
    require_distinct(xs);
    rep.t_points.push_back(smp.t);
    for (const Complex& x : x_grid) {
      for (const auto& xj : xs)
        if (std::abs(x - xj) < kPoleMargin)
          throw SingularEvaluation("med_compatibility_residual: grid point too close to a pole");
      const ResidualParts parts = med_residual_at(x, st, sd, p, abc);
      rep.max_abs_residual = std::max(rep.max_abs_residual, parts.full);
      rep.scalar_part_max = std::max(rep.scalar_part_max, parts.scalar);
      rep.traceless_part_max = std::max(rep.traceless_part_max, parts.traceless);
      rep.commutator_max = std::max(rep.commutator_max, parts.comm);
    }
  }
  return rep;
}

DhvLaxParams DhvLaxParams::from_state(const DhvState& s) {
  DhvLaxParams r;
  r.alpha_plus = (s.w1 - s.w2) - kImag * (s.theta + s.phi);
  r.alpha_minus = (s.w1 - s.w2) + kImag * (s.theta + s.phi);
  r.beta_plus = (s.w1 + s.w2 - 2.0 * s.w3) + kImag * (s.theta - s.phi);
  r.beta_minus = (s.w1 + s.w2 - 2.0 * s.w3) - kImag * (s.theta - s.phi);
  r.c_plus = (kImag * s.w1 + s.phi) * pauli1() + (s.w2 + kImag * s.theta) * pauli2();
  r.c_minus = (kImag * s.w1 - s.phi) * pauli1() - (s.w2 - kImag * s.theta) * pauli2();
  r.d_mat = -s.w3 * pauli3();
  return r;
}

namespace {

void require_p_regular(const DhvLaxParams& par, const Complex& x) {
  const double ax = std::abs(x);
  const double scale = std::abs(par.alpha_plus) * ax * ax * ax * ax +
                       std::abs(par.beta_plus + par.beta_minus) * ax * ax +
                       std::abs(par.alpha_minus);
  if (std::abs(par.p_of(x)) < 1e-10 * (1.0 + scale))
    throw SingularEvaluation("dhv Lax data: P(x) vanishes at the requested x");
}

ResidualParts dhv_residual_at(const Complex& x, const DhvState& s, const DhvState& sdot,
                              const Complex& mu) {
  const DhvLaxParams par = DhvLaxParams::from_state(s);
  const DhvLaxParams rate = DhvLaxParams::from_state(sdot);
  require_p_regular(par, x);

  const Complex P = par.p_of(x);
  const Complex Pdot = rate.p_of(x);
  const Complex Pprime = 4.0 * par.alpha_plus * x * x * x + 2.0 * (par.beta_plus + par.beta_minus) * x;
  const Complex Q = par.q_of(x);
  const Complex Qprime = 3.0 * par.alpha_plus * x * x + par.beta_plus;

  const Mat2 eye = Mat2::Identity();
  const Mat2 n = par.c_plus * x * x + 2.0 * x * par.d_mat + par.c_minus;
  const Mat2 ndot = rate.c_plus * x * x + 2.0 * x * rate.d_mat + rate.c_minus;
  const Mat2 nprime = 2.0 * x * par.c_plus + 2.0 * par.d_mat;

  const Mat2 a = (mu * eye - n) / P;
  const Mat2 da_dt = (-ndot - a * Pdot) / P;
  const Mat2 da_dx = (-nprime - a * Pprime) / P;

  const Mat2 btilde = -0.5 * (par.c_plus * x + par.d_mat + Q * a);
  const Mat2 dbtilde_dx = -0.5 * (par.c_plus + Qprime * a + Q * da_dx);
  const Complex dnu_dx = mu * (par.beta_minus + 4.0 * s.w3 - par.alpha_plus * x * x) / P;

  const Mat2 comm = commutator(a, btilde);
  const Mat2 r = da_dt - dbtilde_dx - 0.5 * dnu_dx * eye + comm;
  const Complex scalar = 0.5 * r.trace();
  const Mat2 traceless = r - scalar * eye;
  return {matrix_max_abs(r), std::abs(scalar), matrix_max_abs(traceless), matrix_max_abs(comm)};
}

}  // namespace

LaxPairEval dhv_lax_eval(const Complex& x, const DhvState& s, const Complex& mu) {
  const DhvLaxParams par = DhvLaxParams::from_state(s);
  require_p_regular(par, x);
  const Complex P = par.p_of(x);
  const Mat2 n = par.c_plus * x * x + 2.0 * x * par.d_mat + par.c_minus;
  const Mat2 a = (mu * Mat2::Identity() - n) / P;
  const Mat2 btilde = -0.5 * (par.c_plus * x + par.d_mat + par.q_of(x) * a);
  const Complex dnu_dx = mu * (par.beta_minus + 4.0 * s.w3 - par.alpha_plus * x * x) / P;
  return {a, btilde, dnu_dx};
}

ResidualReport dhv_compatibility_residual(const Trajectory& traj, const Complex& mu,
                                          const std::vector<Complex>& x_grid,
                                          int t_samples) {
  if (traj.dim() != 5) throw DimensionMismatch("dhv_compatibility_residual: need a DH-V trajectory");
  ResidualReport rep;
  rep.kind = "dhv-lax";
  rep.x_grid = x_grid;
  for (const std::size_t k : pick_sample_indices(traj, t_samples)) {
    const auto& smp = traj.samples()[k];
    const DhvState st = dhv_from_vec(smp.y);
    const DhvState sd = dhv_from_vec(smp.dydt);
    rep.t_points.push_back(smp.t);
    for (const Complex& x : x_grid) {
      const ResidualParts parts = dhv_residual_at(x, st, sd, mu);
      rep.max_abs_residual = std::max(rep.max_abs_residual, parts.full);
      rep.scalar_part_max = std::max(rep.scalar_part_max, parts.scalar);
      rep.traceless_part_max = std::max(rep.traceless_part_max, parts.traceless);
      rep.commutator_max = std::max(rep.commutator_max, parts.comm);
    }
  }
  return rep;
}

ResidualReport z_system_residual(const Trajectory& traj, const MedParams& p,
                                 const HalphenABC& abc, const std::vector<Complex>& x_grid,
                                 int t_samples) {
  MedParams z = p;
  z.mu = 0.0;
  ResidualReport rep = med_compatibility_residual(traj, z, abc, x_grid, t_samples);
  rep.kind = "z-system";
  return rep;
}

ExponentEvolutionReport exponent_evolution_check(const Trajectory& traj, const MedParams& p,
                                                 int site, int n_probes) {
  p.validate();
  if (site < 1 || site > 3) throw DomainError("exponent_evolution_check: site must be 1..3");
  if (traj.dim() != 3) throw DimensionMismatch("exponent_evolution_check: need a hal2 trajectory");
  const int j = site - 1;

  auto scalar_part_at = [&](double s) {
    const auto xs = state_array(hal2_from_vec(traj.state_at(s)));
    require_distinct(xs);
    return p.mu / pole_product(xs, j);
  };

  const double L = traj.total_length();
  const double h = std::min(0.01 * L, 0.02);
  ExponentEvolutionReport rep;
  rep.site = site;

  double err_plus = 0.0, err_minus = 0.0;
  Mat2 matrix_part_ref;
  for (int k = 0; k < n_probes; ++k) {
    // Interior probes, clear of the path ends and of every vertex by the
    // full FD stencil (the time direction jumps at vertices).
    const double s0 = traj.path().clamp_to_segment_interior(
        L * (0.15 + 0.7 * double(k) / std::max(1, n_probes - 1)), 2.0 * h);
    if (s0 - 2.0 * h < 0.0 || s0 + 2.0 * h > L)
      throw TrajectoryTooCoarse("exponent_evolution_check: trajectory too short for the stencil");
    rep.probe_params.push_back(s0);

    const Complex dir =
        (traj.time_at(s0 + 0.5 * h) - traj.time_at(s0 - 0.5 * h)) / Complex(h, 0.0);
    const Complex d_ds = fd_derivative(
        [&](const Complex& sc) { return scalar_part_at(sc.real()); }, Complex(s0, 0.0), h);
    const Complex fd = d_ds / dir;

    const Hal2State st = hal2_from_vec(traj.state_at(s0));
    const auto xs = state_array(st);
    const Complex formula =
        (2.0 * xs[j] + xs[(j + 1) % 3] + xs[(j + 2) % 3]) / pole_product(xs, j) * p.mu;
    err_plus = std::max(err_plus, std::abs(fd - formula));
    err_minus = std::max(err_minus, std::abs(fd + formula));

    const ExponentRecord rec = exponent_record(site, st, p);
    if (k == 0)
      matrix_part_ref = rec.matrix_part;
    else
      rep.matrix_part_drift = std::max(rep.matrix_part_drift,
                                       matrix_max_abs(Mat2(rec.matrix_part - matrix_part_ref)));
  }
  rep.matched_sign = err_plus <= err_minus ? +1 : -1;
  rep.matched_error = std::min(err_plus, err_minus);
  rep.other_sign_error = std::max(err_plus, err_minus);
  return rep;
}

Complex f_integrability_residual(const Hal2State& s, const HalphenABC& abc, const Complex& x) {
  const auto xs = state_array(s);
  Complex P = 1.0;
  for (const auto& xj : xs) P *= x - xj;
  Complex dP_dx = 0.0, dP_dt = 0.0;
  for (int j = 0; j < 3; ++j) {
    Complex prod = 1.0;
    for (int m = 0; m < 3; ++m)
      if (m != j) prod *= x - xs[m];
    dP_dx += prod;
    dP_dt -= hal2_q(xs[j], s, abc) * prod;
  }
  const Complex q = hal2_q(x, s, abc);
  return dP_dt + q * dP_dx - P * (2.0 * x) - (x + xs[0] + xs[1] + xs[2]) * P;
}

std::array<Complex, 3> med_log_coefficients(const Hal2State& s, const Complex& mu) {
  const auto xs = state_array(s);
  require_distinct(xs);
  const Complex sum = xs[0] + xs[1] + xs[2];
  std::array<Complex, 3> f;
  for (int j = 0; j < 3; ++j) f[j] = -mu * (xs[j] + sum) / pole_product(xs, j);
  return f;
}

Eigen::MatrixXcd med_deformation_generator(const std::vector<Eigen::MatrixXcd>& residues,
                                           const std::vector<Complex>& positions,
                                           const std::vector<Complex>& f_col, int k,
                                           const Complex& x,
                                           const std::vector<int>& winding) {
  const std::size_t n = positions.size();
  if (residues.size() != n || f_col.size() != n)
    throw DimensionMismatch("med_deformation_generator: list sizes disagree");
  if (k < 0 || std::size_t(k) >= n)
    throw DomainError("med_deformation_generator: site index out of range");
  if (!winding.empty() && winding.size() != n)
    throw DimensionMismatch("med_deformation_generator: winding size disagrees");
  for (const auto& pos : positions)
    if (std::abs(x - pos) < 1e-14 * (1.0 + std::abs(pos)))
      throw SingularEvaluation("med_deformation_generator: x at a singular point");

  const Eigen::Index dim = residues[std::size_t(k)].rows();
  Eigen::MatrixXcd gen = -residues[std::size_t(k)] / (x - positions[std::size_t(k)]);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Complex logsum = 0.0;
  for (std::size_t jj = 0; jj < n; ++jj) {
    Complex lg = std::log(x - positions[jj]);
    if (!winding.empty()) lg += kImag * (kTwoPi * winding[jj]);
    logsum += f_col[jj] * lg;
  }
  gen += logsum * Eigen::MatrixXcd::Identity(dim, dim);
  return gen;
}

std::vector<std::vector<Eigen::MatrixXcd>> schlesinger_rhs(
    const std::vector<Eigen::MatrixXcd>& residues, const std::vector<Complex>& positions) {
  const std::size_t n = positions.size();
  if (residues.size() != n) throw DimensionMismatch("schlesinger_rhs: list sizes disagree");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t jj = i + 1; jj < n; ++jj)
      if (std::abs(positions[i] - positions[jj]) <
          1e-12 * (1.0 + std::abs(positions[i]) + std::abs(positions[jj])))
        throw CoincidentPositions("schlesinger_rhs: coincident positions");

  std::vector<std::vector<Eigen::MatrixXcd>> d(n, std::vector<Eigen::MatrixXcd>(n));
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::MatrixXcd diag =
        Eigen::MatrixXcd::Zero(residues[k].rows(), residues[k].cols());
    for (std::size_t jj = 0; jj < n; ++jj) {
      if (jj == k) continue;
      d[k][jj] = commutator(residues[k], residues[jj]) / (positions[k] - positions[jj]);
      diag -= d[k][jj];
    }
    d[k][k] = diag;
  }
  return d;
}

}  // namespace halphen
