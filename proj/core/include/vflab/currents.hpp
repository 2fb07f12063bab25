#pragma once

#include "vflab/charforms.hpp"
#include "vflab/common.hpp"
#include "vflab/spaces.hpp"

#include <string>
#include <vector>

namespace vflab::currents {

/// Atom of a point current: a located zero/crossing with an orientation sign,
/// a residue weight, and the local Jacobian condition number as a diagnostic.
struct WeightedPoint {
  spaces::ChartPoint point;
  int sign = 1;
  cplx weight{1.0, 0.0};
  double condition = 1.0;
};

struct PointCurrent {
  std::vector<WeightedPoint> points;
  cplx pair(const std::function<cplx(const RVec&)>& eta) const;
};

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-10;
  double fd_step = 1e-6;
};

/// Zeros of a square system over a box, Newton-polished from a uniform grid
/// of seeds. Signs are sign(det J); duplicates within 10 * tol * condition
/// collapse. A near-singular Jacobian at a zero aborts (transversality).
PointCurrent find_signed_zeros(const std::function<RVec(const RVec&)>& section,
                               const spaces::Box& box, int grid,
                               const NewtonOptions& newton = NewtonOptions{},
                               const std::string& space_id = "base");

/// Crossings of eigenvalues of a unitary loop through -1, located by
/// eigenphase tracking and bisection. Sign +1 for a counterclockwise
/// crossing. Non-simple crossings abort.
PointCurrent find_maslov_crossings(const std::function<Mat(double)>& u_loop, double tol,
                                   int grid = 1024, const std::string& space_id = "loop");

/// Sum of sign * weight * eta(point) over the current.
cplx pair(const PointCurrent& current, const std::function<cplx(const RVec&)>& eta);
/// Same with a degree-0 field as the test function.
cplx pair(const PointCurrent& current, const charforms::FormField& eta);

struct ConvergenceReport {
  std::vector<double> t_schedule;
  std::vector<std::vector<double>> gaps;  // gaps[test_form][time]
  double tolerance = 0.0;
  bool pass = false;
};

/// Gap table |flow pairing - predicted pairing| over a time schedule, one row
/// per test form. Passes iff, for every row, the last gap is within tolerance
/// and the last step is non-increasing (up to 0.1 * tolerance slack).
ConvergenceReport weak_convergence_report(
    const std::function<cplx(double, int)>& flow_pairing,
    const std::function<cplx(int)>& predicted_pairing, int n_test_forms,
    const std::vector<double>& t_schedule, double tolerance);

}  // namespace vflab::currents
