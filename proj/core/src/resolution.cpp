#include "vflab/resolution.hpp"

#include <cmath>

namespace vflab::resolution {

double LocalModel::potential(const flows::LocalModelPoint& p) const {
  return 0.5 * (p.x.squaredNorm() - p.y.squaredNorm());
}

bool LocalModel::in_v(const flows::LocalModelPoint& p, double slack) const {
  const double f2 = p.x.squaredNorm() - p.y.squaredNorm();
  return f2 >= -2.0 * delta - slack && f2 <= 2.0 * delta + slack &&
         p.x.norm() * p.y.norm() <= epsilon + slack;
}

PsiValue psi(double t, double q) {
  if (q < 0.0) throw usage_error("psi requires q >= 0");
  const double r = std::hypot(t, q);
  // Evaluate the large component directly and recover the small one from
  // x y = q; the naive sqrt(r -+ t) cancels catastrophically when q << |t|.
  if (t >= 0.0) {
    const double x = std::sqrt(r + t);
    return {x, x > 0.0 ? q / x : 0.0};
  }
  const double y = std::sqrt(r - t);
  return {q / y, y};
}

flows::LocalModelPoint family_blowup(double t, double q, const RVec& xhat,
                                     const RVec& yhat, const RVec& z, double unit_tol) {
  if (std::abs(xhat.norm() - 1.0) > unit_tol || std::abs(yhat.norm() - 1.0) > unit_tol)
    throw validation_error("family_blowup requires unit direction vectors");
  const PsiValue p = psi(t, q);
  return {p.x * xhat, p.y * yhat, z};
}

flows::LocalModelPoint flowline_level_point(const flows::LocalModelPoint& p, double t) {
  const double nx = p.x.norm();
  const double ny = p.y.norm();
  if (nx == 0.0 || ny == 0.0)
    throw usage_error("flowline_level_point requires x, y != 0");
  return family_blowup(t, nx * ny, p.x / nx, p.y / ny, p.z);
}

double exit_time_to_level(const flows::LocalModelPoint& p, double level) {
  const double x2 = p.x.squaredNorm();
  const double y2 = p.y.squaredNorm();
  if (x2 == 0.0) throw usage_error("exit_time_to_level requires x != 0");
  // Solve (e^{2s} x2 - e^{-2s} y2)/2 = level for s, taking the positive root
  // in the cancellation-free arrangement for either sign of the level.
  const double q = std::sqrt(x2 * y2);
  const double e2s = level >= 0.0 ? (level + std::hypot(level, q)) / x2
                                  : q * q / (x2 * (std::hypot(level, q) - level));
  if (e2s <= 0.0) throw numerical_breakdown("level not reachable", "exit_time_to_level");
  return 0.5 * std::log(e2s);
}

flows::LocalModelPoint theta_delta(const LocalModel& model, const ModelSections& sections,
                                   double lambda, const RVec& v, const RVec& b,
                                   double unit_tol) {
  if (lambda < 0.0) throw usage_error("theta_delta requires lambda >= 0");
  if (v.size() != model.dim_x) throw usage_error("direction dimension mismatch");
  if (std::abs(v.norm() - 1.0) > unit_tol)
    throw validation_error("theta_delta requires a unit direction");
  const RVec a = lambda * v;
  const RVec alpha = sections.alpha(a, b);
  const RVec beta = sections.beta(a, b);
  if (alpha.size() != model.dim_y || beta.size() != model.dim_z)
    throw usage_error("section dimension mismatch");
  const double q = lambda * alpha.norm();
  if (q > model.epsilon)
    throw validation_error("initial slice leaves the model neighborhood (|x||y| > epsilon)");
  const double s = std::sqrt(std::hypot(model.delta, q) + model.delta);
  flows::LocalModelPoint out;
  out.x = s * v;
  out.y = (lambda / s) * alpha;
  out.z = beta;
  return out;
}

}  // namespace vflab::resolution
