#include "vflab/charforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vflab::charforms {

namespace {

int permutation_sign(std::vector<int> perm) {
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    while (perm[i] != static_cast<int>(i)) {
      std::swap(perm[i], perm[perm[i]]);
      sign = -sign;
    }
  }
  return sign;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

cplx i_over_2pi_pow(int j) { return std::pow(kI / (2.0 * kPi), j); }

}  // namespace

exterior::AlternatingForm form_det(const exterior::FormMatrix& m) {
  const int n = m.n();
  exterior::AlternatingForm out(m.dim());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<int> p = perm;
    exterior::AlternatingForm term = exterior::AlternatingForm::scalar(
        m.dim(), cplx{static_cast<double>(permutation_sign(p)), 0.0});
    for (int i = 0; i < n; ++i) term = exterior::wedge(term, m.at(i, perm[i]));
    out += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

exterior::AlternatingForm form_pf(const exterior::FormMatrix& m, double skew_tol) {
  const int n = m.n();
  if (n % 2 != 0) throw usage_error("form_pf requires even size");
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      exterior::AlternatingForm s = m.at(i, j) + m.at(j, i);
      if (s.max_abs() > skew_tol)
        throw validation_error("form_pf: matrix is not antisymmetric within tolerance");
    }
  exterior::AlternatingForm out(m.dim());
  // Sum over perfect matchings: pick the partner of the smallest free index.
  std::vector<int> partner(n, -1);
  std::function<void(exterior::AlternatingForm, int)> rec =
      [&](exterior::AlternatingForm acc, int sign) {
        int i = 0;
        while (i < n && partner[i] >= 0) ++i;
        if (i == n) {
          out += cplx{static_cast<double>(sign), 0.0} * acc;
          return;
        }
        partner[i] = i;  // mark
        int swaps = 0;
        for (int j = i + 1; j < n; ++j) {
          if (partner[j] >= 0) continue;
          partner[j] = i;
          rec(exterior::wedge(acc, m.at(i, j)), sign * ((swaps % 2 == 0) ? 1 : -1));
          partner[j] = -1;
          ++swaps;
        }
        partner[i] = -1;
      };
  rec(exterior::AlternatingForm::scalar(m.dim(), 1.0), 1);
  return out;
}

FormField top_chern_form(const spaces::BundleWithConnection& bundle) {
  FormField f;
  f.chart_dim = bundle.chart_dim;
  f.degree = 2 * bundle.rank;
  f.closedness_claimed = true;
  const cplx scale = i_over_2pi_pow(bundle.rank);
  f.eval = [bundle, scale](const RVec& u) {
    return scale * form_det(spaces::curvature(bundle, u));
  };
  return f;
}

FormField pfaffian_form(const spaces::BundleWithConnection& bundle, int orientation,
                        double skew_tol) {
  if (bundle.rank % 2 != 0) throw usage_error("pfaffian_form requires even rank");
  if (bundle.metric.size() != 0 &&
      (bundle.metric - Mat::Identity(bundle.rank, bundle.rank)).cwiseAbs().maxCoeff() > 1e-12)
    throw validation_error("pfaffian_form expects an orthonormal frame (identity metric)");
  FormField f;
  f.chart_dim = bundle.chart_dim;
  f.degree = bundle.rank;
  f.closedness_claimed = true;
  const double scale =
      static_cast<double>(orientation) / std::pow(2.0 * kPi, bundle.rank / 2.0);
  f.eval = [bundle, scale, skew_tol](const RVec& u) {
    return cplx{scale, 0.0} * form_pf(spaces::curvature(bundle, u), skew_tol);
  };
  return f;
}

FormField odd_chern_form(int k, int chart_dim, std::function<Mat(const RVec&)> phi,
                         fd::Policy pol) {
  if (k < 1) throw usage_error("odd_chern_form requires k >= 1");
  FormField f;
  f.chart_dim = chart_dim;
  f.degree = 2 * k - 1;
  f.closedness_claimed = true;
  const cplx scale = -i_over_2pi_pow(k) * factorial(k - 1) * factorial(k - 1) /
                     factorial(2 * k - 1);
  f.eval = [=](const RVec& u) {
    exterior::FormMatrix omega = spaces::maurer_cartan_pullback(phi, u, pol);
    exterior::FormMatrix p = exterior::form_matrix_power(omega, 2 * k - 1);
    return scale * exterior::supertrace(p, exterior::TraceMode::plain);
  };
  return f;
}

FormField maslov_form(int chart_dim, std::function<Mat(const RVec&)> u_section,
                      spaces::ConnectionCoeffs theta, fd::Policy pol) {
  FormField f;
  f.chart_dim = chart_dim;
  f.degree = 1;
  f.closedness_claimed = true;
  const cplx scale = 1.0 / (2.0 * kPi * kI);
  f.eval = [=](const RVec& u) {
    const Mat g = u_section(u);
    const Mat ginv = g.adjoint();
    std::vector<Mat> th;
    if (theta) th = theta(u);
    exterior::AlternatingForm out(chart_dim);
    for (int a = 0; a < chart_dim; ++a) {
      Mat cov = fd::derivative(u_section, u, a, pol);
      if (!th.empty()) cov += th[a] * g - g * th[a];
      out += exterior::AlternatingForm::monomial(chart_dim, {a}, scale * (ginv * cov).trace());
    }
    return out;
  };
  return f;
}

exterior::FormMatrix superconnection_curvature(const spaces::BundleWithConnection& bundle,
                                               const std::function<Mat(const RVec&)>& a_section,
                                               double t, Parity parity, const RVec& u,
                                               int split_p, int split_q, double grading_tol) {
  const int n = bundle.rank;
  const int m = bundle.chart_dim;
  const Mat a = a_section(u);
  if (a.rows() != n || a.cols() != n)
    throw usage_error("superconnection_curvature: endomorphism size mismatch");

  exterior::FormMatrix f = spaces::curvature(bundle, u);
  exterior::FormMatrix p = f - exterior::FormMatrix::from_matrix(t * t * a * a, m);

  // nabla A = dA + [Theta, A], entrywise 1-forms.
  exterior::FormMatrix na(n, m);
  std::vector<Mat> th;
  if (bundle.theta) th = bundle.theta(u);
  for (int axis = 0; axis < m; ++axis) {
    Mat da = fd::derivative(a_section, u, axis, bundle.curv_policy);
    if (!th.empty()) da += th[axis] * a - a * th[axis];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        na.at(i, j) += exterior::AlternatingForm::monomial(m, {axis}, da(i, j));
  }
  exterior::FormMatrix q = cplx{t, 0.0} * na;

  if (parity == Parity::even) {
    if (split_p < 0 || split_q < 0 || split_p + split_q != n)
      throw usage_error("even superconnection requires a (p, q) split of the rank");
    double diag_block = 0.0;
    diag_block = std::max(diag_block, a.topLeftCorner(split_p, split_p).cwiseAbs().maxCoeff());
    diag_block =
        std::max(diag_block, a.bottomRightCorner(split_q, split_q).cwiseAbs().maxCoeff());
    if (diag_block > grading_tol)
      throw validation_error("even superconnection requires an odd endomorphism");
    exterior::FormMatrix out = p + q;
    out.set_split(split_p, split_q);
    return out;
  }

  // Odd parity: doubled realization [[P, -Q], [Q, P]] of P + Q sigma.
  exterior::FormMatrix out(2 * n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.at(i, j) = p.at(i, j);
      out.at(n + i, n + j) = p.at(i, j);
      out.at(i, n + j) = cplx{-1.0, 0.0} * q.at(i, j);
      out.at(n + i, j) = q.at(i, j);
    }
  out.set_split(n, n);
  return out;
}

exterior::AlternatingForm chern_character(const exterior::FormMatrix& fm, Parity parity) {
  const exterior::FormMatrix e = exterior::form_exp(fm);
  exterior::AlternatingForm s = exterior::supertrace(
      e, parity == Parity::even ? exterior::TraceMode::even : exterior::TraceMode::odd);
  exterior::AlternatingForm out(s.dim());
  for (int d = 0; d <= s.dim(); ++d) {
    exterior::AlternatingForm comp = s.degree_component(d);
    if (comp.is_zero()) continue;
    cplx scale;
    if (parity == Parity::even) {
      if (d % 2 != 0) continue;  // graded trace of even data has no odd part
      scale = i_over_2pi_pow(d / 2);
    } else {
      if (d % 2 != 1) continue;
      scale = i_over_2pi_pow((d - 1) / 2) / std::sqrt(kPi);
    }
    out += scale * comp;
  }
  return out;
}

FormField mathai_quillen_form(const spaces::BundleWithConnection& bundle, double t,
                              int fiber_orientation) {
  const int n = bundle.rank;
  const int m = bundle.chart_dim;
  if (n % 2 != 0) throw usage_error("mathai_quillen_form requires even rank");
  if (bundle.metric.size() != 0 &&
      (bundle.metric - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-12)
    throw validation_error("mathai_quillen_form expects an orthonormal frame");

  FormField field;
  field.chart_dim = m + n;
  field.degree = n;
  field.closedness_claimed = true;
  const double prefactor =
      ((n * (n - 1) / 2) % 2 == 0 ? 1.0 : -1.0) / std::pow(2.0 * kPi, n / 2.0);

  field.eval = [bundle, t, fiber_orientation, prefactor, n, m](const RVec& bu) {
    const RVec b = bu.head(m);
    const RVec x = bu.tail(n);
    const int dim = m + 2 * n;  // base axes, fiber dx axes, fiber eps axes

    exterior::AlternatingForm omega =
        exterior::AlternatingForm::scalar(dim, 0.5 * t * t * x.squaredNorm());

    std::vector<Mat> th;
    if (bundle.theta) th = bundle.theta(b);
    for (int i = 0; i < n; ++i) {
      exterior::AlternatingForm cov = exterior::AlternatingForm::basis(dim, m + i);
      for (int a = 0; a < m && !th.empty(); ++a) {
        cplx c = 0.0;
        for (int j = 0; j < n; ++j) c += th[a](i, j) * x[j];
        cov += exterior::AlternatingForm::monomial(dim, {a}, c);
      }
      omega += cplx{t, 0.0} *
               exterior::wedge(cov, exterior::AlternatingForm::basis(dim, m + n + i));
    }

    exterior::FormMatrix f = spaces::curvature(bundle, b);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        exterior::AlternatingForm fij(dim);
        f.at(i, j).for_each_nonzero([&](unsigned mask, cplx c) { fij[mask] += c; });
        omega += exterior::wedge(
            fij, exterior::wedge(exterior::AlternatingForm::basis(dim, m + n + i),
                                 exterior::AlternatingForm::basis(dim, m + n + j)));
      }

    exterior::AlternatingForm e = exterior::form_exp_scalar(cplx{-1.0, 0.0} * omega);
    exterior::AlternatingForm out =
        exterior::berezin(e, m + n, n, fiber_orientation);
    return cplx{prefactor, 0.0} * out;
  };
  return field;
}

exterior::AlternatingForm exterior_derivative_fd(const FormField& f, const RVec& u,
                                                 fd::Policy pol) {
  const int m = f.chart_dim;
  exterior::AlternatingForm out(m);
  for (int a = 0; a < m; ++a) {
    exterior::AlternatingForm da = fd::derivative(f.eval, u, a, pol);
    exterior::AlternatingForm ea = exterior::AlternatingForm::basis(m, a);
    out += exterior::wedge(ea, da);
  }
  return out;
}

}  // namespace vflab::charforms
