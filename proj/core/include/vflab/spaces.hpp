#pragma once

#include "vflab/common.hpp"
#include "vflab/exterior.hpp"
#include "vflab/fd.hpp"

#include <optional>
#include <vector>

namespace vflab::spaces {

/// Closed rectangular parameter box.
struct Box {
  RVec lo;
  RVec hi;
  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  bool contains(const RVec& u, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (u[i] < lo[i] - slack || u[i] > hi[i] + slack) return false;
    return true;
  }
};

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi);
Box cube(int dim, double lo, double hi);

/// Point of a model space presented in a chart: a space label, a chart index,
/// and chart coordinates.
struct ChartPoint {
  std::string space;
  int chart = 0;
  RVec coords;
};

/// Smooth map from a parameter box into a chart of a model space, carrying an
/// orientation sign for integration. Jacobians come from the analytic callback
/// when present, otherwise central differences with `jac_policy`.
struct Parametrization {
  Box box;
  int target_dim = 0;
  std::function<RVec(const RVec&)> map;
  int orientation = 1;
  fd::Policy jac_policy{};
  std::function<RMat(const RVec&)> analytic_jacobian;

  RMat jacobian(const RVec& u) const;
};

/// u |-> (tan u_1, ..., tan u_d): finite box (-pi/2, pi/2)^d covering R^d.
Parametrization tan_compactified(int dim, double margin = 1e-7);
/// Identity parametrization of a box.
Parametrization box_chart(const Box& box);
/// Affine window u in [-1,1]^d |-> center + halfwidth .* u.
Parametrization window_chart(const RVec& center, const RVec& halfwidth);
/// Composition outer(inner(u)) with the inner box.
Parametrization compose(const Parametrization& inner, std::function<RVec(const RVec&)> outer,
                        int target_dim);

/// Stereographic chart of S^n in R^{n+1}, centered so that v = 0 maps to the
/// first-axis pole: S(v) = (1 - |v|^2, 2v) / (1 + |v|^2).
RVec stereographic(const RVec& v);
/// Analytic pushforward frame: columns dS/dv_j, an (n+1) x n matrix.
RMat stereographic_frame(const RVec& v);
Parametrization stereographic_chart(int n, double compact_margin = 1e-7);

/// Complex vector packed into real chart coordinates (Re z_1, Im z_1, ...).
Vec unpack_complex(const RVec& u);
RVec pack_complex(const Vec& z);

/// Connection form of a trivialized bundle over a chart: Theta(u) returned as
/// the list of du_j coefficient matrices (rank x rank), j = 0..chart_dim-1.
using ConnectionCoeffs = std::function<std::vector<Mat>(const RVec&)>;

struct BundleWithConnection {
  int chart_dim = 0;
  int rank = 0;
  Mat metric;  // constant hermitian fiber metric in the trivialization
  ConnectionCoeffs theta;
  fd::Policy curv_policy = fd::nested_policy();

  exterior::FormMatrix theta_form(const RVec& u) const;
};

BundleWithConnection flat_bundle(int chart_dim, int rank);

/// Data of an ambient trivialized bundle plus a frame of a subbundle.
struct ProjectionData {
  int chart_dim = 0;
  int ambient_rank = 0;
  int rank = 0;
  Mat metric;                 // ambient constant metric (identity if empty)
  std::function<Mat(const RVec&)> metric_fn;  // overrides `metric` when set
  ConnectionCoeffs ambient_theta;  // may be null (flat ambient)
  std::function<Mat(const RVec&)> frame;              // ambient_rank x rank
  std::function<Mat(const RVec&, int)> frame_deriv;   // optional analytic d frame / du_axis
  fd::Policy frame_policy = fd::nested_policy();
};

/// theta = G^{-1} F^* M (dF + Theta F), G = F^* M F: the connection induced on
/// the subbundle by compressing the ambient connection with the frame.
BundleWithConnection projected_connection(const ProjectionData& data);

/// Curvature F = d theta + theta ^ theta at a chart point, as a FormMatrix
/// with entries of degree <= 2 over the chart axes.
exterior::FormMatrix curvature(const BundleWithConnection& b, const RVec& u);

/// Pullback of the Maurer-Cartan form U^{-1} dU through a box -> U(n) map.
/// Entries are 1-forms over the box axes.
exterior::FormMatrix maurer_cartan_pullback(const std::function<Mat(const RVec&)>& phi,
                                            const RVec& u, const fd::Policy& pol = fd::Policy{},
                                            double unit_tol = 1e-6);

/// Frame of tau_perp inside E + C over the graph chart of P(E + C):
/// at chart point v (complex, packed), columns u_i = e_i + (-conj(v_i)) e_{n+1}.
Mat projective_tau_perp_frame(const RVec& v_packed);
/// Analytic derivative of the frame along a real chart axis.
Mat projective_tau_perp_frame_deriv(const RVec& v_packed, int axis);

/// Frame of tau_perp inside C^{k} over the graph chart of CP^{k-1}
/// (lines through (1, w)): columns u_i = e_{i+1} - conj(w_i)/(1+|w|^2) * (1, w).
Mat cpn_tau_perp_frame(const RVec& w_packed);

/// Constant-metric orthonormalization: returns S with frame * S orthonormal
/// (Cholesky of the Gram matrix); S depends smoothly on the frame.
Mat orthonormalizer(const Mat& frame, const Mat& metric);

}  // namespace vflab::spaces
