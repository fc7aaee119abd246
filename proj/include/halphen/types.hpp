#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace halphen {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat3 = Eigen::Matrix3cd;
using Vec = Eigen::VectorXcd;

inline constexpr Complex kImag{0.0, 1.0};

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain (e.g. Im(tau) <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series failed its truncation rule within the hard term cap.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class PathThroughSingularity : public Error {
 public:
  using Error::Error;
};

class DegenerateInitialData : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at a pole or with coincident singular points.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

class StationaryRatio : public Error {
 public:
  using Error::Error;
};

class CoincidentPositions : public Error {
 public:
  using Error::Error;
};

class PoleError : public Error {
 public:
  using Error::Error;
};

class TrajectoryTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration rejected; `field()` names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config error at '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!is_finite(Complex(m(i, j)))) return false;
  return true;
}

inline void require_finite(const Complex& z, const char* what) {
  if (!is_finite(z)) throw DomainError(std::string(what) + ": non-finite value");
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!is_finite(m)) throw DomainError(std::string(what) + ": non-finite entries");
}

/// A polyline in complex time along which ODE systems are integrated.
class PathSpec {
 public:
  explicit PathSpec(std::vector<Complex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) throw DomainError("PathSpec: need at least 2 vertices");
    for (const auto& v : vertices_) require_finite(v, "PathSpec vertex");
    for (std::size_t k = 1; k < vertices_.size(); ++k) {
      if (vertices_[k] == vertices_[k - 1])
        throw DomainError("PathSpec: consecutive vertices must be distinct");
    }
  }
  PathSpec(Complex from, Complex to) : PathSpec(std::vector<Complex>{from, to}) {}

  const std::vector<Complex>& vertices() const { return vertices_; }
  std::size_t segment_count() const { return vertices_.size() - 1; }

  double segment_length(std::size_t k) const {
    return std::abs(vertices_[k + 1] - vertices_[k]);
  }
  Complex segment_direction(std::size_t k) const {
    const Complex d = vertices_[k + 1] - vertices_[k];
    return d / std::abs(d);
  }
  double total_length() const {
    double len = 0.0;
    for (std::size_t k = 0; k < segment_count(); ++k) len += segment_length(k);
    return len;
  }
  /// Complex time at arclength parameter s in [0, total_length()].
  Complex at(double s) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < segment_count(); ++k) {
      const double len = segment_length(k);
      if (s <= acc + len || k + 1 == segment_count()) {
        const double frac = std::min(std::max((s - acc) / len, 0.0), 1.0);
        return vertices_[k] + frac * (vertices_[k + 1] - vertices_[k]);
      }
      acc += len;
    }
    return vertices_.back();
  }
  /// Cumulative arclength at each vertex (size = vertex count).
  std::vector<double> vertex_params() const {
    std::vector<double> acc(vertices_.size(), 0.0);
    for (std::size_t k = 0; k < segment_count(); ++k) acc[k + 1] = acc[k] + segment_length(k);
    return acc;
  }

  /// Clamps s into the interior of its containing segment, at least
  /// `margin` away from the segment ends when the segment allows it.
  /// Finite-difference stencils along the path must not straddle a
  /// vertex, where the time direction jumps.
  double clamp_to_segment_interior(double s, double margin) const {
    const std::vector<double> acc = vertex_params();
    std::size_t seg = 0;
    while (seg + 2 < acc.size() && s > acc[seg + 1]) ++seg;
    const double lo = acc[seg], hi = acc[seg + 1];
    if (hi - lo <= 2.0 * margin) return 0.5 * (lo + hi);
    return std::min(std::max(s, lo + margin), hi - margin);
  }

  /// Smallest distance from any path point to z.
  double distance_to(Complex z) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < segment_count(); ++k) {
      const Complex a = vertices_[k], b = vertices_[k + 1];
      const Complex ab = b - a;
      double u = ((z - a) * std::conj(ab)).real() / std::norm(ab);
      u = std::min(std::max(u, 0.0), 1.0);
      best = std::min(best, std::abs(z - (a + u * ab)));
    }
    return best;
  }

 private:
  std::vector<Complex> vertices_;
};

}  // namespace halphen
