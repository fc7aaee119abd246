#pragma once

#include <optional>

#include "halphen/integrate.hpp"
#include "halphen/types.hpp"

namespace halphen {

struct FuchsianParams {
  Complex a, b, c;
};

/// Potential of y'' = V(z) y with regular singular points at 0, 1, infinity:
/// V = (a+b)/z^2 + (c+b)/(z-1)^2 - 2b/(z(z-1)).
Complex fuchsian_potential(const FuchsianParams& p, const Complex& z);

/// Two initial (y, y') pairs at the path start. The canonical basis
/// (1,0), (0,1) has Wronskian y1'y2 - y1 y2' = -1.
struct FuchsianInit {
  Complex y1{1.0, 0.0}, dy1{0.0, 0.0};
  Complex y2{0.0, 0.0}, dy2{1.0, 0.0};
};

struct FuchsianPoint {
  Complex z, y1, dy1, y2, dy2;
};

/// Two independent solutions integrated jointly along a z-path. The
/// Wronskian y1'y2 - y1 y2' is recorded from the initial data and checked
/// constant along the samples (the equation has no y' term). Dense access
/// between samples uses the underlying trajectory interpolation. The
/// ratio construction t = y1/y2 additionally needs y2 nonvanishing; that
/// is enforced where the ratio is formed, not here.
class FuchsianBasis {
 public:
  FuchsianBasis(FuchsianParams params, Trajectory traj, Complex wronskian);

  const FuchsianParams& params() const { return params_; }
  Complex wronskian() const { return wronskian_; }
  double wronskian_drift() const { return wronskian_drift_; }
  const Trajectory& trajectory() const { return traj_; }

  std::vector<FuchsianPoint> samples() const;
  FuchsianPoint at(double s) const;
  double total_length() const { return traj_.total_length(); }

 private:
  FuchsianParams params_;
  Trajectory traj_;
  Complex wronskian_;
  double wronskian_drift_ = 0.0;
};

FuchsianBasis fuchsian_pair(const FuchsianParams& params, const PathSpec& z_path,
                            const FuchsianInit& init = {}, double tol = 1e-12);

}  // namespace halphen
