#include "vflab/algebra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace vflab::algebra {

bool is_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

bool is_unitary(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  Mat d = a.adjoint() * a - Mat::Identity(a.rows(), a.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

bool is_skew_hermitian(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a + a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

bool is_real_skew_symmetric(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.imag().cwiseAbs().maxCoeff() > tol) return false;
  RMat r = a.real();
  return (r + r.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, r.cwiseAbs().maxCoeff());
}

void validate(const Mat& a, MatrixTag tag, double tol) {
  switch (tag) {
    case MatrixTag::generic:
      return;
    case MatrixTag::hermitian:
      if (!is_hermitian(a, tol)) throw validation_error("matrix is not hermitian within tolerance");
      return;
    case MatrixTag::skew_hermitian:
      if (!is_skew_hermitian(a, tol)) throw validation_error("matrix is not skew-hermitian within tolerance");
      return;
    case MatrixTag::unitary:
      if (!is_unitary(a, tol)) throw validation_error("matrix is not unitary within tolerance");
      return;
    case MatrixTag::real_skew_symmetric:
      if (!is_real_skew_symmetric(a, tol)) throw validation_error("matrix is not real skew-symmetric within tolerance");
      return;
  }
}

namespace {

double pfaffian_recursive(const RMat& m) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 1.0;
  if (n == 2) return m(0, 1);
  double acc = 0.0;
  // Expand along row 0: Pf(M) = sum_j (-1)^j M(0,j) Pf(M with rows/cols {0,j} removed).
  for (Eigen::Index j = 1; j < n; ++j) {
    if (m(0, j) == 0.0) continue;
    RMat sub(n - 2, n - 2);
    Eigen::Index r = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (i == j) continue;
      Eigen::Index c = 0;
      for (Eigen::Index k = 1; k < n; ++k) {
        if (k == j) continue;
        sub(r, c++) = m(i, k);
      }
      ++r;
    }
    double sign = (j % 2 == 1) ? 1.0 : -1.0;
    acc += sign * m(0, j) * pfaffian_recursive(sub);
  }
  return acc;
}

double pfaffian_parlett_reid(RMat m) {
  const Eigen::Index n = m.rows();
  double pf = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Pivot: bring the largest |m(k, j)|, j > k, into position (k, k+1).
    Eigen::Index p = k + 1;
    double best = std::abs(m(k, k + 1));
    for (Eigen::Index j = k + 2; j < n; ++j) {
      if (std::abs(m(k, j)) > best) {
        best = std::abs(m(k, j));
        p = j;
      }
    }
    if (best == 0.0) return 0.0;
    if (p != k + 1) {
      m.row(k + 1).swap(m.row(p));
      m.col(k + 1).swap(m.col(p));
      pf = -pf;
    }
    pf *= m(k, k + 1);
    if (k + 2 < n) {
      double piv = m(k, k + 1);
      RVec tau = m.col(k).segment(k + 2, n - k - 2) / piv;
      // Eliminate column k below k+1 while preserving skew-symmetry.
      for (Eigen::Index i = k + 2; i < n; ++i) {
        double f = tau[i - k - 2];
        if (f == 0.0) continue;
        m.row(i) += f * m.row(k + 1);
        m.col(i) += f * m.col(k + 1);
      }
    }
  }
  return pf;
}

}  // namespace

double pfaffian(const RMat& m, double skew_tol) {
  if (m.rows() != m.cols()) throw usage_error("pfaffian: matrix must be square");
  if (m.rows() % 2 != 0) throw usage_error("pfaffian: dimension must be even");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > skew_tol * scale)
    throw validation_error("pfaffian: matrix is not skew-symmetric within tolerance");
  if (m.rows() <= 6) return pfaffian_recursive(m);
  return pfaffian_parlett_reid(m);
}

cplx pfaffian_complex(const Mat& m, double skew_tol) {
  if (m.rows() != m.cols()) throw usage_error("pfaffian: matrix must be square");
  const Eigen::Index n = m.rows();
  if (n % 2 != 0) throw usage_error("pfaffian: dimension must be even");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m + m.transpose()).cwiseAbs().maxCoeff() > skew_tol * scale)
    throw validation_error("pfaffian: matrix is not skew-symmetric within tolerance");
  // Combinatorial sum over perfect matchings; used for small n only.
  if (n > 8) throw usage_error("pfaffian_complex: supported up to dimension 8");
  std::function<cplx(std::vector<int>&)> rec = [&](std::vector<int>& idx) -> cplx {
    if (idx.empty()) return cplx{1.0, 0.0};
    int a = idx[0];
    cplx acc{0.0, 0.0};
    for (size_t j = 1; j < idx.size(); ++j) {
      int b = idx[j];
      std::vector<int> rest;
      for (size_t k = 1; k < idx.size(); ++k)
        if (k != j) rest.push_back(idx[k]);
      double sign = (j % 2 == 1) ? 1.0 : -1.0;
      acc += sign * m(a, b) * rec(rest);
    }
    return acc;
  };
  std::vector<int> all(n);
  for (Eigen::Index i = 0; i < n; ++i) all[i] = static_cast<int>(i);
  return rec(all);
}

Mat cayley(const Mat& a, double herm_tol) {
  validate(a, MatrixTag::hermitian, herm_tol);
  const Eigen::Index n = a.rows();
  Mat id = Mat::Identity(n, n);
  return (a - kI * id) * (a + kI * id).inverse();
}

Mat inverse_cayley(const Mat& u, double unit_tol, double spec_gap) {
  validate(u, MatrixTag::unitary, unit_tol);
  const Eigen::Index n = u.rows();
  Mat id = Mat::Identity(n, n);
  Mat d = id - u;
  Eigen::JacobiSVD<Mat> svd(d);
  if (svd.singularValues().minCoeff() < spec_gap)
    throw numerical_breakdown("inverse_cayley: 1 is in the spectrum of U");
  Mat a = kI * (id + u) * d.inverse();
  // The result is hermitian for unitary input; symmetrize away roundoff.
  return 0.5 * (a + a.adjoint());
}

HermitianEigen hermitian_eigen(const Mat& a, double herm_tol) {
  validate(a, MatrixTag::hermitian, herm_tol);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success) throw numerical_breakdown("hermitian_eigen: solver failed");
  return HermitianEigen{es.eigenvalues(), es.eigenvectors()};
}

Mat matrix_func(const Mat& a, const std::string& f, double herm_tol) {
  double (*fn)(double) = nullptr;
  if (f == "exp") fn = std::exp;
  else if (f == "tanh") fn = std::tanh;
  else if (f == "sinh") fn = std::sinh;
  else if (f == "cosh") fn = std::cosh;
  else throw usage_error("matrix_func: unknown function '" + f + "'");
  HermitianEigen eig = hermitian_eigen(a, herm_tol);
  RVec fv = eig.values.unaryExpr([fn](double x) { return fn(x); });
  return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

int kernel_dim(const Mat& a, double tol) {
  Eigen::JacobiSVD<Mat> svd(a);
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  int d = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] < tol * scale) ++d;
  return d;
}

Mat kernel_basis(const Mat& a, double tol) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  int d = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] < tol * scale) ++d;
  return svd.matrixV().rightCols(d);
}

int intersection_dim(const Mat& u_basis, const Mat& w_basis, double tol) {
  if (u_basis.rows() != w_basis.rows()) throw usage_error("intersection_dim: row mismatch");
  if (u_basis.cols() == 0 || w_basis.cols() == 0) return 0;
  Mat joint(u_basis.rows(), u_basis.cols() + w_basis.cols());
  joint << u_basis, w_basis;
  Eigen::JacobiSVD<Mat> svd(joint);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++rank;
  return static_cast<int>(u_basis.cols() + w_basis.cols()) - rank;
}

}  // namespace vflab::algebra
