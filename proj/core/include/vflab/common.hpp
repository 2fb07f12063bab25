#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace vflab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline const cplx kI{0.0, 1.0};

/// Thrown when an input fails a structural precondition (shape, tag, degree).
struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric validation fails (unitarity drift, singular frame, ...).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a computation degenerates (NaN sample, singular flow denominator,
/// non-transversal zero, degenerate eigenvalue crossing). Carries a location hint.
struct numerical_breakdown : std::runtime_error {
  explicit numerical_breakdown(const std::string& what, std::string where_ = {})
      : std::runtime_error(where_.empty() ? what : what + " [at " + where_ + "]"),
        where(std::move(where_)) {}
  std::string where;
};

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using rng_t = std::mt19937_64;

inline std::string fmt_point(const RVec& u) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    s += std::to_string(u[i]);
    if (i + 1 < u.size()) s += ", ";
  }
  return s + ")";
}

inline double rel_err(cplx computed, cplx expected) {
  double scale = std::max(1.0, std::abs(expected));
  return std::abs(computed - expected) / scale;
}

}  // namespace vflab
