#pragma once

#include "vflab/common.hpp"
#include "vflab/flows.hpp"

namespace vflab::resolution {

/// Hyperbolic local model around a critical set: coordinates (x, y, z) with
/// x unstable (dim a), y stable (dim b), z central (dim c), potential
/// f = (|x|^2 - |y|^2)/2 and flow gamma(t,x,y,z) = (e^t x, e^{-t} y, z).
/// The neighborhood V is cut out by -2 delta <= |x|^2 - |y|^2 <= 2 delta and
/// |x| |y| <= epsilon.
struct LocalModel {
  int dim_x = 0;
  int dim_y = 0;
  int dim_z = 0;
  double delta = 1.0;
  double epsilon = 1.0;

  double potential(const flows::LocalModelPoint& p) const;
  bool in_v(const flows::LocalModelPoint& p, double slack = 0.0) const;
};

/// Two-dimensional model resolution: psi(t, q) =
/// (sqrt(sqrt(t^2+q^2) + t), sqrt(sqrt(t^2+q^2) - t)), q >= 0.
/// Satisfies x y = q and (x^2 - y^2)/2 = t.
struct PsiValue {
  double x = 0.0;
  double y = 0.0;
};
PsiValue psi(double t, double q);

/// Family blow-up Psi(t, q, xhat, yhat, z) = (xhat psi_x, yhat psi_y, z)
/// for unit vectors xhat, yhat.
flows::LocalModelPoint family_blowup(double t, double q, const RVec& xhat,
                                     const RVec& yhat, const RVec& z,
                                     double unit_tol = 1e-8);

/// Point on the flow line through p at potential level t. Requires x, y != 0.
flows::LocalModelPoint flowline_level_point(const flows::LocalModelPoint& p, double t);

/// Time at which the trajectory through p reaches potential level `level`.
/// Requires |x| > 0 (forward reachability of positive levels).
double exit_time_to_level(const flows::LocalModelPoint& p, double level);

/// Sections (alpha, beta) of the local model over a chart of the lower
/// critical manifold: the initial slice is phi_0(a, b) = (a, alpha(a,b), beta(a,b)).
struct ModelSections {
  int dim_b = 0;
  std::function<RVec(const RVec& a, const RVec& b)> alpha;  // -> R^{dim_y}
  std::function<RVec(const RVec& a, const RVec& b)> beta;   // -> R^{dim_z}
};

/// Resolved incidence chart theta_delta(lambda, v, b) =
/// (v sqrt(sqrt(delta^2 + lambda^2 |alpha|^2) + delta),
///  lambda alpha / sqrt(sqrt(delta^2 + lambda^2 |alpha|^2) + delta),
///  beta),
/// with alpha = alpha(lambda v, b), beta = beta(lambda v, b), |v| = 1,
/// lambda >= 0. For lambda > 0 this is the level-delta point of the
/// trajectory through phi_0(lambda v, b); at lambda = 0 it limits onto the
/// unstable sphere x = v sqrt(2 delta). Throws when the trajectory leaves V
/// (lambda |alpha| > epsilon).
flows::LocalModelPoint theta_delta(const LocalModel& model, const ModelSections& sections,
                                   double lambda, const RVec& v, const RVec& b,
                                   double unit_tol = 1e-8);

}  // namespace vflab::resolution
