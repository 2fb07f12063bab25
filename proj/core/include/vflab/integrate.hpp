#pragma once

#include "vflab/charforms.hpp"
#include "vflab/common.hpp"
#include "vflab/spaces.hpp"

#include <utility>
#include <vector>

namespace vflab::integrate {

/// Worker cap for sample evaluation. 0 restores the automatic default.
/// Results are bitwise independent of the worker count.
void set_jobs(int jobs);
int jobs();

struct Scheme {
  enum class Kind { gauss_tensor, monte_carlo } kind = Kind::gauss_tensor;
  enum class ErrorMode { none, richardson, mc_stderr } error_mode = ErrorMode::none;
  int points_per_axis = 16;     // gauss_tensor; >= 2
  long samples = 20000;         // monte_carlo; >= 100
  std::uint64_t seed = 1;

  static Scheme gauss(int points_per_axis, ErrorMode mode = ErrorMode::none);
  static Scheme monte_carlo(long samples, std::uint64_t seed,
                            ErrorMode mode = ErrorMode::mc_stderr);
};

struct IntegralResult {
  cplx value{0.0, 0.0};
  double err = 0.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1] (cached).
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n);

/// Integral of a scalar density over a box. NaN samples abort with location.
IntegralResult integrate_scalar(const spaces::Box& box,
                                const std::function<cplx(const RVec&)>& f,
                                const Scheme& scheme);

/// Full pullback of a form field through a parametrization at a box point:
/// coefficients over box axes via minors of the Jacobian.
exterior::AlternatingForm pullback_form(const charforms::FormField& f,
                                        const spaces::Parametrization& p, const RVec& u);

/// Oriented integral of a degree-d field over a d-dimensional parametrization.
IntegralResult integrate_form(const spaces::Parametrization& p, const charforms::FormField& f,
                              const Scheme& scheme);

/// (-1)^{n-1} contour integral of |lambda - 1|^{2n-2} lambda^{-1} d lambda
/// over the unit circle; closed form (-1)^{n-1} 2 pi i binom(2n-2, n-1).
cplx s1_residue_integral(int n, const Scheme& scheme);

/// Fiber integration of a field on a product chart (base axes first): at base
/// point b, integrates over the fiber parametrization with the fiber frame
/// vectors placed first. Output degree drops by the fiber dimension.
charforms::FormField fiber_integrate(const charforms::FormField& total, int base_dim,
                                     const spaces::Parametrization& fiber,
                                     const Scheme& scheme);

/// Flow-out of a section: (s, b) -> flow_s(section(b)) in a total chart.
struct FlowOut {
  int base_dim = 0;
  int total_dim = 0;
  spaces::Box base_box;
  std::function<RVec(double, const RVec&)> map;
  fd::Policy jac_policy{};
};

/// Integral over {s} x base of phi_s^* omega wedge eta.
cplx slice_pairing(const FlowOut& flow, const charforms::FormField& omega,
                   const charforms::FormField& eta, double s, const Scheme& scheme);

/// T_t(omega)(eta) = integral over [0,t] x base of phi^* omega wedge p2^* eta.
cplx transgression_pairing(const FlowOut& flow, const charforms::FormField& omega,
                           const charforms::FormField& eta, double t, const Scheme& scheme);

/// Both sides of the boundary identity for closed omega:
/// (-1)^{deg omega} T_t(omega)(d eta) vs the slice difference at t and 0.
struct BoundaryCheck {
  cplx transgression_side{0.0, 0.0};
  cplx slice_side{0.0, 0.0};
  double defect = 0.0;
};
BoundaryCheck boundary_check(const FlowOut& flow, const charforms::FormField& omega,
                             const charforms::FormField& eta, const charforms::FormField& deta,
                             double t, const Scheme& scheme);

/// Riemannian volume of the flow tube over [t0, t1] x base: integral of
/// sqrt(det G) with G the pulled-back Gram matrix of phi, or of the graph map
/// xi = (phi_s, phi_0) for the strong variant.
double flow_tube_volume(const FlowOut& flow, const std::function<RMat(const RVec&)>& metric,
                        double t0, double t1, const Scheme& scheme, bool strong = false);

/// Cumulative tube volumes at the given increasing times.
std::vector<double> tube_volume_schedule(const FlowOut& flow,
                                         const std::function<RMat(const RVec&)>& metric,
                                         const std::vector<double>& ts, const Scheme& scheme,
                                         bool strong = false);

/// Box-truncation refinement: integrates f over chart_at_radius(r) for
/// r = r0, factor r0, ... until the increment drops below tol.
IntegralResult refined_tail(const charforms::FormField& f,
                            const std::function<spaces::Parametrization(double)>& chart_at_radius,
                            double r0, double factor, double tol, int max_steps,
                            const Scheme& scheme);

/// Field equal to f outside the inf-norm windows and zero inside.
charforms::FormField masked(const charforms::FormField& f,
                            std::vector<std::pair<RVec, double>> windows);

}  // namespace vflab::integrate
