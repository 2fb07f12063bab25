#include "vflab/currents.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vflab::currents {

namespace {

RMat fd_jacobian(const std::function<RVec(const RVec&)>& f, const RVec& u, double h) {
  const int d = static_cast<int>(u.size());
  RMat j(d, d);
  for (int a = 0; a < d; ++a) {
    RVec up = u, um = u;
    up[a] += h;
    um[a] -= h;
    j.col(a) = (f(up) - f(um)) / (2.0 * h);
  }
  return j;
}

double wrap_pi(double x) {
  x = std::fmod(x, 2.0 * kPi);
  if (x <= -kPi) x += 2.0 * kPi;
  if (x > kPi) x -= 2.0 * kPi;
  return x;
}

double circ_dist(double a, double b) { return std::abs(wrap_pi(a - b)); }

std::vector<double> eig_phases(const Mat& u) {
  Eigen::ComplexEigenSolver<Mat> es(u, false);
  std::vector<double> out(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index k = 0; k < u.rows(); ++k) out[static_cast<std::size_t>(k)] = std::arg(es.eigenvalues()[k]);
  return out;
}

double nearest_phase(const std::vector<double>& phases, double target) {
  double best = phases[0], bd = circ_dist(phases[0], target);
  for (double p : phases) {
    const double d = circ_dist(p, target);
    if (d < bd) {
      bd = d;
      best = p;
    }
  }
  return best;
}

}  // namespace

cplx PointCurrent::pair(const std::function<cplx(const RVec&)>& eta) const {
  return currents::pair(*this, eta);
}

PointCurrent find_signed_zeros(const std::function<RVec(const RVec&)>& section,
                               const spaces::Box& box, int grid, const NewtonOptions& newton,
                               const std::string& space_id) {
  if (grid < 1) throw usage_error("find_signed_zeros: grid must be positive");
  const int d = box.dim();
  PointCurrent cur;

  const long seeds = static_cast<long>(std::pow(grid, d) + 0.5);
  for (long idx = 0; idx < seeds; ++idx) {
    RVec u(d);
    long rem = idx;
    for (int a = 0; a < d; ++a) {
      const int k = static_cast<int>(rem % grid);
      rem /= grid;
      u[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * (k + 0.5) / grid;
    }

    bool converged = false;
    for (int it = 0; it < newton.max_iter; ++it) {
      const RVec s = section(u);
      if (!s.allFinite()) break;
      const RMat j = fd_jacobian(section, u, newton.fd_step);
      Eigen::FullPivLU<RMat> lu(j);
      if (!lu.isInvertible()) break;
      const RVec step = lu.solve(s);
      u -= step;
      if (!u.allFinite()) break;
      if (s.norm() < newton.tol && step.norm() < newton.tol) {
        converged = true;
        break;
      }
    }
    if (!converged || !box.contains(u, 1e-9)) continue;

    const RMat j = fd_jacobian(section, u, newton.fd_step);
    Eigen::JacobiSVD<RMat> svd(j);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[d - 1];
    if (smin < 1e-6 * std::max(1.0, smax))
      throw numerical_breakdown("transversality failure: near-singular Jacobian at a zero",
                                fmt_point(u));
    const double cond = smax / smin;

    bool dup = false;
    for (const auto& p : cur.points) {
      const double radius = 10.0 * newton.tol * std::max({1.0, cond, p.condition});
      if ((p.point.coords - u).norm() < radius) {
        dup = true;
        break;
      }
    }
    if (dup) continue;

    WeightedPoint wp;
    wp.point = spaces::ChartPoint{space_id, 0, u};
    wp.sign = j.determinant() > 0.0 ? 1 : -1;
    wp.weight = cplx{1.0, 0.0};
    wp.condition = cond;
    cur.points.push_back(std::move(wp));
  }

  std::sort(cur.points.begin(), cur.points.end(), [](const WeightedPoint& a, const WeightedPoint& b) {
    return std::lexicographical_compare(a.point.coords.begin(), a.point.coords.end(),
                                        b.point.coords.begin(), b.point.coords.end());
  });
  return cur;
}

PointCurrent find_maslov_crossings(const std::function<Mat(double)>& u_loop, double tol, int grid,
                                   const std::string& space_id) {
  if (grid < 8) throw usage_error("find_maslov_crossings: grid too coarse");
  if (tol <= 0.0) throw usage_error("find_maslov_crossings: tol must be positive");

  std::vector<std::vector<double>> phases(static_cast<std::size_t>(grid + 1));
  for (int i = 0; i <= grid; ++i)
    phases[static_cast<std::size_t>(i)] = eig_phases(u_loop(2.0 * kPi * i / grid));

  PointCurrent cur;
  const double guard = kPi / 4.0;

  for (int i = 0; i < grid; ++i) {
    const double ta = 2.0 * kPi * i / grid, tb = 2.0 * kPi * (i + 1) / grid;
    for (double phi_a : phases[static_cast<std::size_t>(i)]) {
      const double ha = wrap_pi(phi_a - kPi);
      if (std::abs(ha) >= guard) continue;
      const double phi_b = nearest_phase(phases[static_cast<std::size_t>(i + 1)], phi_a);
      const double hb = wrap_pi(phi_b - kPi);
      if (std::abs(hb) >= guard) continue;
      if (ha == 0.0 || ha * hb >= 0.0) continue;  // exact grid hits are caught from the left

      // Bisection on the tracked eigenphase's signed distance to pi.
      double a = ta, b = tb, fa = ha, track = phi_a;
      while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const std::vector<double> pm = eig_phases(u_loop(m));
        const double phi_m = nearest_phase(pm, track);
        const double hm = wrap_pi(phi_m - kPi);
        track = phi_m;
        if (hm == 0.0) {
          a = b = m;
          break;
        }
        if ((fa < 0.0) == (hm < 0.0)) {
          a = m;
          fa = hm;
        } else {
          b = m;
        }
      }
      const double theta = 0.5 * (a + b);

      // Simplicity: exactly one eigenphase may sit near pi at the crossing.
      const std::vector<double> pc = eig_phases(u_loop(theta));
      std::vector<double> dists;
      for (double p : pc) dists.push_back(std::abs(wrap_pi(p - kPi)));
      std::sort(dists.begin(), dists.end());
      if (dists.size() > 1 && dists[1] < 1e-4) {
        std::ostringstream os;
        os << "theta = " << theta;
        throw numerical_breakdown("degenerate eigenvalue crossing", os.str());
      }

      bool dup = false;
      for (const auto& p : cur.points)
        if (circ_dist(p.point.coords[0], theta) < std::max(10.0 * tol, 1e-12)) {
          dup = true;
          break;
        }
      if (dup) continue;

      WeightedPoint wp;
      RVec c(1);
      c[0] = theta;
      wp.point = spaces::ChartPoint{space_id, 0, c};
      wp.sign = hb > ha ? 1 : -1;
      wp.weight = cplx{1.0, 0.0};
      wp.condition = dists.size() > 1 ? kPi / std::max(dists[1], 1e-300) : 1.0;
      cur.points.push_back(std::move(wp));
    }
  }

  std::sort(cur.points.begin(), cur.points.end(),
            [](const WeightedPoint& a, const WeightedPoint& b) {
              return a.point.coords[0] < b.point.coords[0];
            });
  return cur;
}

cplx pair(const PointCurrent& current, const std::function<cplx(const RVec&)>& eta) {
  cplx acc{0.0, 0.0};
  for (const auto& p : current.points)
    acc += static_cast<double>(p.sign) * p.weight * eta(p.point.coords);
  return acc;
}

cplx pair(const PointCurrent& current, const charforms::FormField& eta) {
  if (eta.degree > 0) throw usage_error("pair: test field must have degree 0");
  return pair(current, [&eta](const RVec& u) { return eta.eval(u)[0u]; });
}

ConvergenceReport weak_convergence_report(const std::function<cplx(double, int)>& flow_pairing,
                                          const std::function<cplx(int)>& predicted_pairing,
                                          int n_test_forms, const std::vector<double>& t_schedule,
                                          double tolerance) {
  if (n_test_forms < 1) throw usage_error("weak_convergence_report: need a test form");
  for (std::size_t i = 1; i < t_schedule.size(); ++i)
    if (!(t_schedule[i] > t_schedule[i - 1]))
      throw usage_error("weak_convergence_report: t_schedule must be strictly increasing");

  ConvergenceReport rep;
  rep.t_schedule = t_schedule;
  rep.tolerance = tolerance;
  rep.gaps.resize(static_cast<std::size_t>(n_test_forms));
  bool ok = true;
  for (int w = 0; w < n_test_forms; ++w) {
    const cplx target = predicted_pairing(w);
    auto& row = rep.gaps[static_cast<std::size_t>(w)];
    for (double t : t_schedule) row.push_back(std::abs(flow_pairing(t, w) - target));
    const std::size_t m = row.size();
    bool row_ok = m > 0 && row[m - 1] <= tolerance;
    if (m >= 2 && row[m - 1] > row[m - 2] + 0.1 * tolerance) row_ok = false;
    ok = ok && row_ok;
  }
  rep.pass = ok;
  return rep;
}

}  // namespace vflab::currents
