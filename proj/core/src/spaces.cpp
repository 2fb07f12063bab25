#include "vflab/spaces.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace vflab::spaces {

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  if (lo.size() != hi.size()) throw usage_error("make_box: lo/hi size mismatch");
  Box b;
  b.lo = RVec(static_cast<Eigen::Index>(lo.size()));
  b.hi = RVec(static_cast<Eigen::Index>(hi.size()));
  Eigen::Index i = 0;
  for (double v : lo) b.lo[i++] = v;
  i = 0;
  for (double v : hi) b.hi[i++] = v;
  for (Eigen::Index k = 0; k < b.lo.size(); ++k)
    if (b.lo[k] >= b.hi[k]) throw usage_error("make_box: lo must be < hi");
  return b;
}

Box cube(int dim, double lo, double hi) {
  Box b;
  b.lo = RVec::Constant(dim, lo);
  b.hi = RVec::Constant(dim, hi);
  if (lo >= hi) throw usage_error("cube: lo must be < hi");
  return b;
}

RMat Parametrization::jacobian(const RVec& u) const {
  if (analytic_jacobian) return analytic_jacobian(u);
  RMat j(target_dim, box.dim());
  for (int a = 0; a < box.dim(); ++a)
    j.col(a) = fd::derivative(map, u, a, jac_policy);
  return j;
}

Parametrization tan_compactified(int dim, double margin) {
  Parametrization p;
  p.box = cube(dim, -kPi / 2 + margin, kPi / 2 - margin);
  p.target_dim = dim;
  p.map = [](const RVec& u) { return u.array().tan().matrix().eval(); };
  p.analytic_jacobian = [dim](const RVec& u) {
    RMat j = RMat::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      double c = std::cos(u[i]);
      j(i, i) = 1.0 / (c * c);
    }
    return j;
  };
  return p;
}

Parametrization box_chart(const Box& box) {
  Parametrization p;
  p.box = box;
  p.target_dim = box.dim();
  p.map = [](const RVec& u) { return u; };
  p.analytic_jacobian = [d = box.dim()](const RVec&) { return RMat::Identity(d, d); };
  return p;
}

Parametrization window_chart(const RVec& center, const RVec& halfwidth) {
  if (center.size() != halfwidth.size()) throw usage_error("window_chart: size mismatch");
  Parametrization p;
  const int d = static_cast<int>(center.size());
  p.box = cube(d, -1.0, 1.0);
  p.target_dim = d;
  p.map = [center, halfwidth](const RVec& u) {
    return (center.array() + halfwidth.array() * u.array()).matrix().eval();
  };
  p.analytic_jacobian = [halfwidth, d](const RVec&) {
    RMat j = RMat::Zero(d, d);
    for (int i = 0; i < d; ++i) j(i, i) = halfwidth[i];
    return j;
  };
  return p;
}

Parametrization compose(const Parametrization& inner, std::function<RVec(const RVec&)> outer,
                        int target_dim) {
  Parametrization p;
  p.box = inner.box;
  p.target_dim = target_dim;
  p.orientation = inner.orientation;
  p.jac_policy = inner.jac_policy;
  auto inner_map = inner.map;
  p.map = [inner_map, outer](const RVec& u) { return outer(inner_map(u)); };
  return p;
}

RVec stereographic(const RVec& v) {
  const double r2 = v.squaredNorm();
  RVec p(v.size() + 1);
  p[0] = (1.0 - r2) / (1.0 + r2);
  p.tail(v.size()) = 2.0 * v / (1.0 + r2);
  return p;
}

RMat stereographic_frame(const RVec& v) {
  const int n = static_cast<int>(v.size());
  const double r2 = v.squaredNorm();
  const double w = 1.0 + r2;
  RMat f(n + 1, n);
  for (int j = 0; j < n; ++j) {
    f(0, j) = -4.0 * v[j] / (w * w);
    for (int i = 0; i < n; ++i)
      f(i + 1, j) = 2.0 * ((i == j ? 1.0 : 0.0) / w - 2.0 * v[i] * v[j] / (w * w));
  }
  return f;
}

Parametrization stereographic_chart(int n, double compact_margin) {
  Parametrization inner = tan_compactified(n, compact_margin);
  Parametrization p = compose(inner, [](const RVec& v) { return stereographic(v); }, n + 1);
  auto inner_jac = inner.analytic_jacobian;
  p.analytic_jacobian = [inner_map = inner.map, inner_jac](const RVec& u) {
    RVec v = inner_map(u);
    return (stereographic_frame(v) * inner_jac(u)).eval();
  };
  return p;
}

Vec unpack_complex(const RVec& u) {
  if (u.size() % 2 != 0) throw usage_error("unpack_complex: odd length");
  Vec z(u.size() / 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = cplx{u[2 * i], u[2 * i + 1]};
  return z;
}

RVec pack_complex(const Vec& z) {
  RVec u(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    u[2 * i] = z[i].real();
    u[2 * i + 1] = z[i].imag();
  }
  return u;
}

exterior::FormMatrix BundleWithConnection::theta_form(const RVec& u) const {
  std::vector<Mat> t = theta ? theta(u) : std::vector<Mat>(chart_dim, Mat::Zero(rank, rank));
  exterior::FormMatrix m(rank, chart_dim);
  for (int a = 0; a < chart_dim; ++a)
    for (int i = 0; i < rank; ++i)
      for (int j = 0; j < rank; ++j)
        m.at(i, j) += exterior::AlternatingForm::monomial(chart_dim, {a}, t[a](i, j));
  return m;
}

BundleWithConnection flat_bundle(int chart_dim, int rank) {
  BundleWithConnection b;
  b.chart_dim = chart_dim;
  b.rank = rank;
  b.metric = Mat::Identity(rank, rank);
  b.theta = nullptr;
  return b;
}

BundleWithConnection projected_connection(const ProjectionData& data) {
  if (!data.frame) throw usage_error("projected_connection: frame callback required");
  BundleWithConnection b;
  b.chart_dim = data.chart_dim;
  b.rank = data.rank;
  b.metric = Mat::Identity(data.rank, data.rank);
  const Mat metric = (data.metric.size() == 0)
                         ? Mat(Mat::Identity(data.ambient_rank, data.ambient_rank))
                         : data.metric;
  auto metric_fn = data.metric_fn;
  auto frame = data.frame;
  auto frame_deriv = data.frame_deriv;
  auto ambient_theta = data.ambient_theta;
  auto pol = data.frame_policy;
  const int cd = data.chart_dim;
  b.theta = [frame, frame_deriv, ambient_theta, metric, metric_fn, pol, cd](const RVec& u) {
    Mat f = frame(u);
    const Mat m = metric_fn ? metric_fn(u) : metric;
    Mat fm = f.adjoint() * m;
    Mat g = fm * f;
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success)
      throw numerical_breakdown("projected_connection: degenerate frame Gram matrix",
                                fmt_point(u));
    std::vector<Mat> amb;
    if (ambient_theta) amb = ambient_theta(u);
    std::vector<Mat> out(cd);
    for (int a = 0; a < cd; ++a) {
      Mat df = frame_deriv ? frame_deriv(u, a) : fd::derivative(frame, u, a, pol);
      Mat cov = df;
      if (!amb.empty()) cov += amb[a] * f;
      out[a] = llt.solve(fm * cov);
    }
    return out;
  };
  return b;
}

exterior::FormMatrix curvature(const BundleWithConnection& b, const RVec& u) {
  const int m = b.chart_dim;
  const int n = b.rank;
  exterior::FormMatrix f(n, m);
  std::vector<Mat> th =
      b.theta ? b.theta(u) : std::vector<Mat>(m, Mat::Zero(n, n));
  // d theta: need d/du_i of theta_j for all pairs.
  std::vector<std::vector<Mat>> dth(m);
  if (b.theta) {
    auto axis_derivative = [&](int axis) {
      auto eval = [&](double s) {
        RVec v = u;
        v[axis] += s;
        return b.theta(v);
      };
      const double h = b.curv_policy.step;
      std::vector<Mat> out;
      if (b.curv_policy.order >= 4) {
        auto p1 = eval(h), m1 = eval(-h), p2 = eval(2 * h), m2 = eval(-2 * h);
        out.resize(p1.size());
        for (std::size_t j = 0; j < p1.size(); ++j)
          out[j] = (8.0 * (p1[j] - m1[j]) - (p2[j] - m2[j])) / (12.0 * h);
      } else {
        auto p1 = eval(h), m1 = eval(-h);
        out.resize(p1.size());
        for (std::size_t j = 0; j < p1.size(); ++j) out[j] = (p1[j] - m1[j]) / (2.0 * h);
      }
      return out;
    };
    for (int i = 0; i < m; ++i) dth[i] = axis_derivative(i);
  } else {
    for (int i = 0; i < m; ++i) dth[i].assign(m, Mat::Zero(n, n));
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      Mat coeff = dth[i][j] - dth[j][i] + th[i] * th[j] - th[j] * th[i];
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          f.at(r, c) += exterior::AlternatingForm::monomial(m, {i, j}, coeff(r, c));
    }
  return f;
}

exterior::FormMatrix maurer_cartan_pullback(const std::function<Mat(const RVec&)>& phi,
                                            const RVec& u, const fd::Policy& pol,
                                            double unit_tol) {
  Mat g = phi(u);
  if (g.rows() != g.cols()) throw usage_error("maurer_cartan_pullback: map must be square-valued");
  Mat err = g.adjoint() * g - Mat::Identity(g.rows(), g.cols());
  if (err.cwiseAbs().maxCoeff() > unit_tol)
    throw validation_error("maurer_cartan_pullback: map is not unitary at the base point");
  const int m = static_cast<int>(u.size());
  const int n = static_cast<int>(g.rows());
  exterior::FormMatrix omega(n, m);
  Mat ginv = g.adjoint();
  for (int a = 0; a < m; ++a) {
    Mat d = fd::derivative(phi, u, a, pol);
    Mat w = ginv * d;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        omega.at(i, j) += exterior::AlternatingForm::monomial(m, {a}, w(i, j));
  }
  return omega;
}

Mat projective_tau_perp_frame(const RVec& v_packed) {
  Vec v = unpack_complex(v_packed);
  const Eigen::Index n = v.size();
  Mat f = Mat::Zero(n + 1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f(i, i) = cplx{1.0, 0.0};
    f(n, i) = -std::conj(v[i]);
  }
  return f;
}

Mat projective_tau_perp_frame_deriv(const RVec& v_packed, int axis) {
  Vec v = unpack_complex(v_packed);
  const Eigen::Index n = v.size();
  Mat d = Mat::Zero(n + 1, n);
  const Eigen::Index i = axis / 2;
  // d(-conj(v_i)) / dRe v_i = -1, d(-conj(v_i)) / dIm v_i = +i.
  d(n, i) = (axis % 2 == 0) ? cplx{-1.0, 0.0} : cplx{0.0, 1.0};
  return d;
}

Mat cpn_tau_perp_frame(const RVec& w_packed) {
  Vec w = unpack_complex(w_packed);
  const Eigen::Index k = w.size() + 1;
  const double denom = 1.0 + w.squaredNorm();
  Vec line(k);
  line[0] = cplx{1.0, 0.0};
  line.tail(w.size()) = w;
  Mat f = Mat::Zero(k, k - 1);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    f.col(i) = -std::conj(w[i]) / denom * line;
    f(i + 1, i) += cplx{1.0, 0.0};
  }
  return f;
}

Mat orthonormalizer(const Mat& frame, const Mat& metric) {
  Mat g = frame.adjoint() * metric * frame;
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw numerical_breakdown("orthonormalizer: frame Gram matrix not positive definite");
  Mat l = llt.matrixL();
  return l.adjoint().inverse();
}

}  // namespace vflab::spaces
