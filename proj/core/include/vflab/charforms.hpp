#pragma once

#include "vflab/common.hpp"
#include "vflab/exterior.hpp"
#include "vflab/spaces.hpp"

#include <vector>

namespace vflab::charforms {

/// A form-valued field over one chart. degree = -1 marks mixed degree.
struct FormField {
  std::string space_id;
  int chart_dim = 0;
  int degree = -1;
  bool closedness_claimed = false;
  std::function<exterior::AlternatingForm(const RVec&)> eval;
};

/// Determinant of a FormMatrix with commuting (even-degree) entries,
/// expanded over permutations.
exterior::AlternatingForm form_det(const exterior::FormMatrix& m);

/// Pfaffian of an antisymmetric FormMatrix with commuting entries, expanded
/// over perfect matchings. Requires even size.
exterior::AlternatingForm form_pf(const exterior::FormMatrix& m, double skew_tol = 1e-8);

/// c_n = (i/2pi)^n det(curvature) of a rank-n bundle.
FormField top_chern_form(const spaces::BundleWithConnection& bundle);

/// (2pi)^{-n/2} Pf(curvature) of a metric connection on an oriented real
/// rank-n bundle presented in an oriented orthonormal frame (identity metric).
/// orientation = -1 flips the frame orientation.
FormField pfaffian_form(const spaces::BundleWithConnection& bundle, int orientation = 1,
                        double skew_tol = 1e-6);

/// c_{k-1/2} = -(i/2pi)^k [(k-1)!]^2/(2k-1)! tr(omega^{2k-1}) with omega the
/// Maurer-Cartan pullback of phi.
FormField odd_chern_form(int k, int chart_dim, std::function<Mat(const RVec&)> phi,
                         fd::Policy pol = {});

/// (1/2pi i) tr(U^{-1}(dU + [Theta, U])). Pass a null theta for d alone.
FormField maslov_form(int chart_dim, std::function<Mat(const RVec&)> u_section,
                      spaces::ConnectionCoeffs theta = nullptr, fd::Policy pol = {});

enum class Parity { even, odd };

/// Superconnection curvature at scale t in the Gaussian-convergent
/// normalization F_t = F(nabla) - t^2 A^2 + t (nabla A), with
/// nabla A = dA + [Theta, A].
///   even: n x n FormMatrix carrying the bundle's (p, q) split; A must be odd
///         for the split (vanishing diagonal blocks).
///   odd:  2n x 2n doubled realization [[P, -Q], [Q, P]] with P the even part
///         and Q = t nabla A the sigma coefficient, split (n, n).
exterior::FormMatrix superconnection_curvature(const spaces::BundleWithConnection& bundle,
                                               const std::function<Mat(const RVec&)>& a_section,
                                               double t, Parity parity, const RVec& u,
                                               int split_p = -1, int split_q = -1,
                                               double grading_tol = 1e-10);

/// Graded Chern character str(exp(F_t)) with the topological rescale applied
/// to the output: even degree 2j scaled by (i/2pi)^j, odd degree 2j-1 scaled
/// by (i/2pi)^{j-1}/sqrt(pi).
exterior::AlternatingForm chern_character(const exterior::FormMatrix& fm, Parity parity);

/// Mathai-Quillen form mu_t of an oriented even-rank-n real metric bundle
/// presented in an oriented orthonormal frame over a base chart of dim m.
/// The field lives on the total chart (base coords, then fiber coords x):
///   omega_t = t^2 |x|^2 / 2 + t sum_i (dx_i + (Theta x)_i) eps_i
///             + sum_{i<j} F_ij eps_i eps_j,
///   mu_t = (-1)^{n(n-1)/2} (2pi)^{-n/2} Berezin(exp(-omega_t)).
FormField mathai_quillen_form(const spaces::BundleWithConnection& bundle, double t,
                              int fiber_orientation = 1);

/// Finite-difference exterior derivative of a field at a point.
exterior::AlternatingForm exterior_derivative_fd(const FormField& f, const RVec& u,
                                                 fd::Policy pol = {});

}  // namespace vflab::charforms
