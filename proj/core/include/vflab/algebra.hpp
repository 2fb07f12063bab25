#pragma once

#include "vflab/common.hpp"

namespace vflab::algebra {

/// Structural tags a matrix argument can be validated against.
enum class MatrixTag { generic, hermitian, skew_hermitian, unitary, real_skew_symmetric };

bool is_hermitian(const Mat& a, double tol = 1e-10);
bool is_unitary(const Mat& a, double tol = 1e-10);
bool is_skew_hermitian(const Mat& a, double tol = 1e-10);
bool is_real_skew_symmetric(const Mat& a, double tol = 1e-10);

/// Throws usage_error when `a` fails the tag's validator.
void validate(const Mat& a, MatrixTag tag, double tol = 1e-8);

/// Pfaffian of a real skew-symmetric matrix of even dimension.
/// Convention: pfaffian([[0,1],[-1,0]]) = +1, pfaffian(M)^2 = det(M).
/// Recursive cofactor expansion for n <= 6, tridiagonalization with
/// full pivoting (Parlett-Reid style) above.
double pfaffian(const RMat& m, double skew_tol = 1e-10);

/// Complex Pfaffian with the same convention (used by form-level Pfaffians
/// where entries have been evaluated on tangent pairs).
cplx pfaffian_complex(const Mat& m, double skew_tol = 1e-8);

/// Cayley transform U = (A - iI)(A + iI)^{-1} of a hermitian matrix.
/// Eigenvalue map: lambda -> (lambda - i)/(lambda + i); 1 is never attained.
Mat cayley(const Mat& a, double herm_tol = 1e-8);

/// Inverse Cayley transform A = i(I + U)(I - U)^{-1}; requires 1 not in spec(U).
Mat inverse_cayley(const Mat& u, double unit_tol = 1e-8, double spec_gap = 1e-10);

struct HermitianEigen {
  RVec values;   // ascending
  Mat vectors;   // unitary, columns are eigenvectors
};

HermitianEigen hermitian_eigen(const Mat& a, double herm_tol = 1e-8);

/// f(A) for hermitian A via eigendecomposition, f in {exp, tanh, sinh, cosh}.
Mat matrix_func(const Mat& a, const std::string& f, double herm_tol = 1e-8);

/// dim Ker(a - mu I) counted as eigenvalues of hermitian-structured problems:
/// here computed from singular values below tol * scale.
int kernel_dim(const Mat& a, double tol = 1e-7);

/// Orthonormal basis (columns) of Ker(a), singular vectors below tol.
Mat kernel_basis(const Mat& a, double tol = 1e-7);

/// dim(span U  cap  span W) from rank deficiency of [U | W].
int intersection_dim(const Mat& u_basis, const Mat& w_basis, double tol = 1e-7);

}  // namespace vflab::algebra
