#pragma once

#include <complex>

#include <Eigen/Dense>

namespace ccg {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Thin SVD, A = U diag(S) V^dagger, singular values descending.
struct Svd {
  CMatrix U;
  RVector S;
  CMatrix V;
};

/// LAPACK zgesvd. Throws Error(SvdFailure).
Svd svd(const CMatrix& a);

/// Singular values only.
RVector singular_values(const CMatrix& a);

/// H = V diag(values) V^dagger, values ascending (zheevr).
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};

/// Reads the lower triangle only. Throws Error(SvdFailure).
HermitianEigen hermitian_eigen(const CMatrix& h);

/// Solves A X = B with partial-pivoting LU (zgesv). Throws
/// Error(SingularSystem) on an exactly singular or ill-conditioned pivot.
CMatrix lu_solve(const CMatrix& a, const CMatrix& b);

/// ||a - b||_F / max(||b||_F, tiny).
double relative_frobenius(const CMatrix& a, const CMatrix& b);

/// ||a - a^dagger||_F / ||a||_F (0 for the zero matrix).
double hermiticity_defect(const CMatrix& a);

/// Worker threads used inside BLAS calls.
void set_blas_threads(int n);

}  // namespace ccg
