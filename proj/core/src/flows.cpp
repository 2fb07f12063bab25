#include "vflab/flows.hpp"

#include "vflab/algebra.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace vflab::flows {

namespace {

Mat solve_right(const Mat& num, const Mat& den, const std::string& where) {
  Eigen::FullPivLU<Mat> lu(den);
  if (!lu.isInvertible()) throw numerical_breakdown("singular denominator", where);
  return num * lu.inverse();
}

Mat orthonormal_columns(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

}  // namespace

Mat unitary_tanh_flow(double t, const Mat& u, double unit_tol) {
  algebra::validate(u, algebra::MatrixTag::unitary, unit_tol);
  const double s = std::tanh(t);
  const Mat id = Mat::Identity(u.rows(), u.cols());
  return solve_right(s * id + u, id + s * u, "unitary_tanh_flow");
}

Mat fa_flow(double t, const Mat& u, const Mat& a, double herm_tol, double unit_tol) {
  algebra::validate(a, algebra::MatrixTag::hermitian, herm_tol);
  algebra::validate(u, algebra::MatrixTag::unitary, unit_tol);
  const Mat sh = algebra::matrix_func(t * a, "sinh");
  const Mat ch = algebra::matrix_func(t * a, "cosh");
  std::ostringstream where;
  where << "fa_flow at t = " << t;
  return solve_right(sh + ch * u, ch + sh * u, where.str());
}

Mat fa_velocity(const Mat& u, const Mat& a) { return a - u * a * u; }

SpanningPair grassmann_linear_flow(double t, const SpanningPair& p, double rank_tol) {
  Mat stacked(p.x.rows() + p.y.rows(), p.x.cols());
  stacked << std::exp(t) * p.x, std::exp(-t) * p.y;
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < rank_tol * sv(0))
    throw usage_error("grassmann_linear_flow: spanning pair lost rank");
  Mat q = svd.matrixU();
  return {q.topRows(p.x.rows()), q.bottomRows(p.y.rows())};
}

Mat spanning_projector(const SpanningPair& p) {
  Mat stacked(p.x.rows() + p.y.rows(), p.x.cols());
  stacked << p.x, p.y;
  Mat q = orthonormal_columns(stacked);
  return q * q.adjoint();
}

double chordal_distance(const Mat& proj_a, const Mat& proj_b) {
  return (proj_a - proj_b).norm();
}

Mat grassmann_forward_limit(const SpanningPair& p, double rank_tol) {
  const Eigen::Index np = p.x.rows(), nm = p.y.rows(), k = p.x.cols();
  Eigen::JacobiSVD<Mat> svd(p.x, Eigen::ComputeThinU | Eigen::ComputeFullV);
  Eigen::Index r = 0;
  const double scale = std::max(svd.singularValues()(0), 1.0);
  while (r < k && svd.singularValues()(r) > rank_tol * scale) ++r;
  Mat basis = Mat::Zero(np + nm, k);
  for (Eigen::Index c = 0; c < r; ++c) basis.col(c).head(np) = svd.matrixU().col(c);
  // Ker X spans the remaining right singular directions; push through Y.
  for (Eigen::Index c = r; c < k; ++c) {
    Vec w = p.y * svd.matrixV().col(c);
    if (w.norm() < rank_tol)
      throw usage_error("grassmann_forward_limit: degenerate pair (X and Y share kernel)");
    basis.col(c).tail(nm) = w / w.norm();
  }
  Mat q = orthonormal_columns(basis);
  return q * q.adjoint();
}

RVec projective_chart_flow(double t, const RVec& v_packed) {
  return std::exp(2.0 * t) * v_packed;
}

RVec sphere_height_flow(double t, const RVec& v) { return std::exp(t) * v; }

double sphere_height_potential(const RVec& v) {
  const double r2 = v.squaredNorm();
  return (r2 - 1.0) / (r2 + 1.0);
}

RVec radial_flow(double t, const RVec& v) { return std::exp(t) * v; }

LocalModelPoint local_model_flow(double t, const LocalModelPoint& p) {
  return {std::exp(t) * p.x, std::exp(-t) * p.y, p.z};
}

StratumRecord classify_unitary_stratum(const Mat& u, double tol, double unit_tol) {
  algebra::validate(u, algebra::MatrixTag::unitary, unit_tol);
  const int n = static_cast<int>(u.rows());
  Eigen::ComplexEigenSolver<Mat> es(u);
  if (es.info() != Eigen::Success)
    throw numerical_breakdown("eigendecomposition failed", "classify_unitary_stratum");

  StratumRecord out;
  out.n = n;
  std::vector<int> minus_idx, plus_idx;
  for (int i = 0; i < n; ++i) {
    const cplx lam = es.eigenvalues()(i);
    const double dm = std::abs(lam + 1.0), dp = std::abs(lam - 1.0);
    if (dm < tol) {
      ++out.k;
      minus_idx.push_back(i);
    }
    if (dp < tol) {
      ++out.ker_one_dim;
      plus_idx.push_back(i);
    }
    if ((dm >= tol && dm < 10.0 * tol) || (dp >= tol && dp < 10.0 * tol)) out.ambiguous = true;
  }
  out.codim_stable = out.k * out.k;
  out.codim_unstable = (n - out.k) * (n - out.k);
  out.dim_critical = 2 * out.k * (n - out.k);

  auto incidences = [&](const std::vector<int>& idx) {
    Mat ker(n, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) ker.col(c) = es.eigenvectors().col(idx[c]);
    std::vector<int> dims(n + 1, 0);
    dims[0] = static_cast<int>(idx.size());
    for (int m = 1; m < n; ++m) {
      if (idx.empty()) continue;
      Mat w = Mat::Zero(n, n - m);
      for (int c = 0; c < n - m; ++c) w(m + c, c) = 1.0;
      dims[m] = algebra::intersection_dim(ker, w);
    }
    return dims;
  };
  out.incidence_minus = incidences(minus_idx);
  out.incidence_plus = incidences(plus_idx);
  return out;
}

std::vector<int> reflection_index_set(const Mat& u, const Mat& a_eigvecs, double tol) {
  const int n = static_cast<int>(u.rows());
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    const Vec v = a_eigvecs.col(i);
    const Vec uv = u * v;
    if ((uv + v).norm() < tol) {
      out.push_back(i + 1);
    } else if ((uv - v).norm() >= tol) {
      throw validation_error("matrix is not a reflection in the given eigenbasis");
    }
  }
  return out;
}

int reflection_stable_codim(const std::vector<int>& index_set) {
  int c = 0;
  for (int i : index_set) c += 2 * i - 1;
  return c;
}

Mat make_reflection(const Mat& a_eigvecs, const std::vector<int>& index_set) {
  const int n = static_cast<int>(a_eigvecs.rows());
  Mat d = Mat::Identity(n, n);
  for (int i : index_set) {
    if (i < 1 || i > n) throw usage_error("reflection index out of range");
    d(i - 1, i - 1) = -1.0;
  }
  return a_eigvecs * d * a_eigvecs.adjoint();
}

}  // namespace vflab::flows
