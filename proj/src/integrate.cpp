#include "halphen/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace halphen {

Trajectory::Trajectory(PathSpec path, std::vector<TrajectorySample> samples,
                       std::size_t accepted, std::size_t rejected)
    : path_(std::move(path)),
      samples_(std::move(samples)),
      accepted_(accepted),
      rejected_(rejected) {
  if (samples_.empty()) throw DomainError("Trajectory: no samples");
  for (std::size_t k = 1; k < samples_.size(); ++k) {
    if (!(samples_[k].s > samples_[k - 1].s))
      throw DomainError("Trajectory: sample parameters must be strictly increasing");
  }
}

bool Trajectory::reached_path_end() const {
  const double L = path_.total_length();
  return std::abs(samples_.back().s - L) <= 1e-9 * std::max(1.0, L);
}

std::size_t Trajectory::nearest_sample(double s) const {
  auto it = std::lower_bound(samples_.begin(), samples_.end(), s,
                             [](const TrajectorySample& a, double v) { return a.s < v; });
  if (it == samples_.begin()) return 0;
  if (it == samples_.end()) return samples_.size() - 1;
  const std::size_t hi = std::size_t(it - samples_.begin());
  return (s - samples_[hi - 1].s <= samples_[hi].s - s) ? hi - 1 : hi;
}

Vec Trajectory::state_at(double s) const {
  if (s < samples_.front().s - 1e-12 || s > samples_.back().s + 1e-12)
    throw TrajectoryTooCoarse("state_at: parameter outside trajectory range");
  if (samples_.size() == 1) return samples_.front().y;
  s = std::clamp(s, samples_.front().s, samples_.back().s);
  auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                             [](double v, const TrajectorySample& a) { return v < a.s; });
  std::size_t hi = std::min<std::size_t>(std::size_t(it - samples_.begin()), samples_.size() - 1);
  if (hi == 0) hi = 1;
  const TrajectorySample& a = samples_[hi - 1];
  const TrajectorySample& b = samples_[hi];
  const double dl = b.s - a.s;
  const double th = (s - a.s) / dl;
  // Segment direction is exact for a polyline: dt/ds is constant between
  // consecutive samples (integration restarts at every vertex).
  const Complex dir = (b.t - a.t) / dl;
  const Vec ma = a.dydt * dir;
  const Vec mb = b.dydt * dir;
  const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
  const double h10 = th * (1 - th) * (1 - th);
  const double h01 = th * th * (3 - 2 * th);
  const double h11 = th * th * (th - 1);
  return h00 * a.y + (h10 * dl) * ma + h01 * b.y + (h11 * dl) * mb;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// b - bhat, the embedded 4th-order error weights.
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;

double scaled_error_norm(const Vec& err, const Vec& y0, const Vec& y1, double tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = tol * (1.0 + std::max(std::abs(y0[i]), std::abs(y1[i])));
    const double r = std::abs(err[i]) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / double(err.size()));
}

// Tolerance-aware initial step along one segment, so that loose tolerances
// start tolerance-limited instead of clamp-limited.
double initial_step(const std::function<Vec(double, const Vec&)>& rhs, const Vec& y0,
                    const Vec& f0, double len, double tol) {
  auto wnorm = [&](const Vec& v) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sc = 1.0 + std::abs(y0[i]);
      acc += std::norm(v[i]) / (sc * sc);
    }
    return std::sqrt(acc / double(v.size()));
  };
  const double d0 = wnorm(y0), d1 = wnorm(f0);
  double h0 = (d1 > 1e-10) ? 0.01 * std::max(d0, 1.0) / d1 : 1e-3 * len;
  h0 = std::min(h0, 0.5 * len);
  const Vec f1 = rhs(h0, y0 + h0 * f0);
  const double d2 = wnorm(Vec(f1 - f0)) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = (dmax > 1e-14) ? std::pow(0.01 * tol / dmax, 0.2) : 0.1 * len;
  return std::min({100.0 * h0, h1, len});
}

}  // namespace

Trajectory integrate_path(const FieldFn& field, const Vec& y0, const PathSpec& path,
                          double tol, const IntegrateOptions& opts) {
  if (!(tol > 0.0)) throw DomainError("integrate_path: tol must be positive");
  require_finite(y0, "integrate_path y0");

  const Eigen::Index n = y0.size();
  auto eval = [&](const Complex& t, const Vec& y) {
    Vec f = field(t, y);
    if (f.size() != n)
      throw DimensionMismatch("integrate_path: field dimension does not match state");
    return f;
  };

  std::vector<TrajectorySample> samples;
  std::size_t accepted = 0, rejected = 0;

  auto blow_up = [&](const std::string& why) -> BlowUpError {
    // Hand back whatever was integrated so far.
    std::vector<TrajectorySample> partial = samples;
    return BlowUpError("integrate_path: " + why,
                       Trajectory(path, std::move(partial), accepted, rejected));
  };

  Vec y = y0;
  double s_origin = 0.0;
  {
    const Complex t0 = path.vertices().front();
    Vec f0 = eval(t0, y);
    samples.push_back({0.0, t0, y, f0, 0.0});
  }

  std::size_t total_steps = 0;
  for (std::size_t seg = 0; seg < path.segment_count(); ++seg) {
    const double len = path.segment_length(seg);
    const Complex dir = path.segment_direction(seg);
    const Complex t_base = path.vertices()[seg];

    // RHS in the real segment parameter sigma.
    auto rhs = [&](double sigma, const Vec& v) { return Vec(dir * eval(t_base + sigma * dir, v)); };

    double sigma = 0.0;
    Vec k1 = rhs(0.0, y);
    double h = initial_step(rhs, y, k1, len, tol);
    double err_prev = 1.0;

    while (sigma < len) {
      if (++total_steps > opts.max_steps)
        throw ConvergenceFailure("integrate_path: step limit exceeded");
      h = std::min(h, len - sigma);
      if (h < opts.min_step_fraction * len) throw blow_up("step size underflow");

      const Vec k2 = rhs(sigma + kC2 * h, y + h * (kA21 * k1));
      const Vec k3 = rhs(sigma + kC3 * h, y + h * (kA31 * k1 + kA32 * k2));
      const Vec k4 = rhs(sigma + kC4 * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
      const Vec k5 = rhs(sigma + kC5 * h, y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
      const Vec k6 =
          rhs(sigma + h, y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
      const Vec ynew = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      const Vec k7 = rhs(sigma + h, ynew);  // FSAL stage
      const Vec errv =
          h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

      if (!is_finite(ynew)) throw blow_up("non-finite state encountered");

      const double err = scaled_error_norm(errv, y, ynew, tol);
      if (err <= 1.0) {
        sigma += h;
        y = ynew;
        k1 = k7;
        ++accepted;
        samples.push_back({s_origin + sigma, t_base + sigma * dir, y, Vec(k1 / dir),
                           errv.cwiseAbs().maxCoeff()});
        if (y.cwiseAbs().maxCoeff() > opts.state_norm_cap)
          throw blow_up("state norm cap exceeded");
        // PI controller (accept branch).
        const double fac =
            0.9 * std::pow(std::max(err, 1e-10), -0.17) * std::pow(err_prev, 0.04);
        h *= std::clamp(fac, 0.2, 5.0);
        err_prev = std::max(err, 1e-4);
      } else {
        ++rejected;
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      }
    }
    s_origin += len;
  }

  return Trajectory(path, std::move(samples), accepted, rejected);
}

}  // namespace halphen
