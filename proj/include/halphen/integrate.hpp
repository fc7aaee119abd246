#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "halphen/types.hpp"

namespace halphen {

/// Right-hand side of y' = f(t, y) with complex time t.
using FieldFn = std::function<Vec(const Complex&, const Vec&)>;

struct TrajectorySample {
  double s = 0.0;       // arclength parameter along the path polyline
  Complex t;            // complex time
  Vec y;                // state
  Vec dydt;             // field value at (t, y)
  double err_est = 0.0; // local error estimate of the accepting step
};

/// Dense record of an adaptive integration along a PathSpec.
///
/// Samples sit at the accepted step endpoints (and at every path vertex);
/// states between samples come from cubic Hermite interpolation on the
/// stored value/derivative pairs.
class Trajectory {
 public:
  Trajectory(PathSpec path, std::vector<TrajectorySample> samples,
             std::size_t accepted, std::size_t rejected);

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  const PathSpec& path() const { return path_; }
  int dim() const { return samples_.empty() ? 0 : int(samples_.front().y.size()); }
  double total_length() const { return samples_.back().s; }
  bool reached_path_end() const;

  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }

  Complex time_at(double s) const { return path_.at(s); }
  Vec state_at(double s) const;
  /// Index of the sample whose parameter is closest to s.
  std::size_t nearest_sample(double s) const;

 private:
  PathSpec path_;
  std::vector<TrajectorySample> samples_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

/// Raised when the state norm exceeds the cap or the step size underflows;
/// signals approach to a movable singularity or natural boundary. The
/// partial trajectory up to the failure is attached.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

struct IntegrateOptions {
  double state_norm_cap = 1e8;
  double min_step_fraction = 1e-12;  // of the segment length
  std::size_t max_steps = 1000000;
};

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) along a
/// polyline path in complex time. The real path parameter is integrated
/// and the field is multiplied by the segment direction, so each accepted
/// step keeps its scaled local error estimate below tol.
Trajectory integrate_path(const FieldFn& field, const Vec& y0, const PathSpec& path,
                          double tol, const IntegrateOptions& opts = {});

inline double fd_default_step(const Complex& z0) { return 1e-4 * std::max(1.0, std::abs(z0)); }

/// Five-point central difference (one Richardson level, O(h^4)) of f at z0
/// taken along the complex direction dir. Works for any value type with
/// linear arithmetic (Complex, Eigen vectors/matrices). Exceptions thrown
/// by f propagate unchanged.
template <typename F>
auto fd_derivative_along(F&& f, const Complex& z0, const Complex& dir, double h) {
  using V = std::decay_t<decltype(f(z0))>;
  const Complex step = h * dir;
  const V fp1 = f(z0 + step), fm1 = f(z0 - step);
  const V fp2 = f(z0 + 2.0 * step), fm2 = f(z0 - 2.0 * step);
  const V num = 8.0 * (fp1 - fm1) - (fp2 - fm2);
  return V(num / (12.0 * step));
}

template <typename F>
auto fd_derivative_along(F&& f, const Complex& z0, const Complex& dir) {
  return fd_derivative_along(std::forward<F>(f), z0, dir, fd_default_step(z0));
}

template <typename F>
auto fd_derivative(F&& f, const Complex& z0, double h) {
  return fd_derivative_along(std::forward<F>(f), z0, Complex(1.0, 0.0), h);
}

template <typename F>
auto fd_derivative(F&& f, const Complex& z0) {
  return fd_derivative(std::forward<F>(f), z0, fd_default_step(z0));
}

}  // namespace halphen
