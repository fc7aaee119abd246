#include "halphen/fuchsian.hpp"

#include <cmath>

namespace halphen {

Complex fuchsian_potential(const FuchsianParams& p, const Complex& z) {
  const Complex zm1 = z - 1.0;
  return (p.a + p.b) / (z * z) + (p.c + p.b) / (zm1 * zm1) - 2.0 * p.b / (z * zm1);
}

namespace {

FuchsianPoint point_from(const Complex& z, const Vec& v) {
  return {z, v[0], v[1], v[2], v[3]};
}

Complex wronskian_of(const Vec& v) { return v[1] * v[2] - v[0] * v[3]; }

}  // namespace

FuchsianBasis::FuchsianBasis(FuchsianParams params, Trajectory traj, Complex wronskian)
    : params_(params), traj_(std::move(traj)), wronskian_(wronskian) {
  const double wscale = std::abs(wronskian_);
  for (const auto& smp : traj_.samples()) {
    const double drift = std::abs(wronskian_of(smp.y) - wronskian_);
    wronskian_drift_ = std::max(wronskian_drift_, drift);
  }
  if (wronskian_drift_ > 1e-10 * wscale)
    throw Error("fuchsian_pair: wronskian drift exceeds 1e-10 relative");
}

std::vector<FuchsianPoint> FuchsianBasis::samples() const {
  std::vector<FuchsianPoint> pts;
  pts.reserve(traj_.samples().size());
  for (const auto& smp : traj_.samples()) pts.push_back(point_from(smp.t, smp.y));
  return pts;
}

FuchsianPoint FuchsianBasis::at(double s) const {
  return point_from(traj_.time_at(s), traj_.state_at(s));
}

FuchsianBasis fuchsian_pair(const FuchsianParams& params, const PathSpec& z_path,
                            const FuchsianInit& init, double tol) {
  if (z_path.distance_to(Complex(0.0, 0.0)) < 1e-3 || z_path.distance_to(Complex(1.0, 0.0)) < 1e-3)
    throw PathThroughSingularity("fuchsian_pair: z-path must keep distance >= 1e-3 from 0 and 1");

  const Complex w0 = init.dy1 * init.y2 - init.y1 * init.dy2;
  const double iscale = std::abs(init.y1) + std::abs(init.dy1) + std::abs(init.y2) +
                        std::abs(init.dy2);
  if (std::abs(w0) < 1e-13 * (1.0 + iscale * iscale))
    throw DegenerateInitialData("fuchsian_pair: initial pairs are linearly dependent");

  FieldFn field = [params](const Complex& z, const Vec& v) {
    const Complex pot = fuchsian_potential(params, z);
    return Vec{{v[1], pot * v[0], v[3], pot * v[2]}};
  };
  const Vec v0{{init.y1, init.dy1, init.y2, init.dy2}};
  Trajectory traj = integrate_path(field, v0, z_path, tol);
  return FuchsianBasis(params, std::move(traj), w0);
}

}  // namespace halphen
