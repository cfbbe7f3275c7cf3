#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace finsler {

/// Largest chart dimension supported. Vectors and matrices are stack-allocated
/// up to this size.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Error categories shared by the C++ core and the C API.
enum class ErrorCode {
  invalid_argument = 1,
  domain = 2,
  degenerate_direction = 3,
  metric = 4,
  numeric = 5,
  solver = 6,
  unsupported_structure = 7,
  config = 8,
  io = 9,
  not_converged = 10,
  geometric = 11,
};

class FinslerError : public std::runtime_error {
 public:
  FinslerError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public FinslerError {
 public:
  explicit DomainError(const std::string& what) : FinslerError(ErrorCode::domain, what) {}
};

class DegenerateDirectionError : public FinslerError {
 public:
  explicit DegenerateDirectionError(const std::string& what)
      : FinslerError(ErrorCode::degenerate_direction, what) {}
};

class MetricError : public FinslerError {
 public:
  explicit MetricError(const std::string& what) : FinslerError(ErrorCode::metric, what) {}
};

class NumericError : public FinslerError {
 public:
  NumericError(const std::string& what, double residual = 0.0)
      : FinslerError(ErrorCode::numeric, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class UnsupportedStructureError : public FinslerError {
 public:
  explicit UnsupportedStructureError(const std::string& what)
      : FinslerError(ErrorCode::unsupported_structure, what) {}
};

/// Raised when the two-point solver exhausts its budget. Carries the best
/// lattice upper bound found, or +inf when none is available.
class SolverError : public FinslerError {
 public:
  SolverError(const std::string& what, double upper_bound)
      : FinslerError(ErrorCode::solver, what), upper_bound_(upper_bound) {}
  double upper_bound() const noexcept { return upper_bound_; }

 private:
  double upper_bound_;
};

class GeometricError : public FinslerError {
 public:
  explicit GeometricError(const std::string& what) : FinslerError(ErrorCode::geometric, what) {}
};

/// Integration left the chart. The last state still inside the domain is kept.
class DomainExit : public DomainError {
 public:
  DomainExit(const std::string& what, double time, Vec point, Vec velocity)
      : DomainError(what), time_(time), point_(std::move(point)), velocity_(std::move(velocity)) {}
  double time() const noexcept { return time_; }
  const Vec& point() const noexcept { return point_; }
  const Vec& velocity() const noexcept { return velocity_; }

 private:
  double time_;
  Vec point_;
  Vec velocity_;
};

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace finsler
