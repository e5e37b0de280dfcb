#include "ccg/linalg.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <lapacke.h>

#include "ccg/error.hpp"

extern "C" void openblas_set_num_threads(int);

namespace ccg {

namespace {

lapack_complex_double* as_lapack(cplx* p) {
  return reinterpret_cast<lapack_complex_double*>(p);
}

}  // namespace

Svd svd(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  Svd out;
  out.S.resize(k);
  if (k == 0) {
    out.U.resize(m, 0);
    out.V.resize(n, 0);
    return out;
  }
  CMatrix work = a;
  CMatrix u(m, k);
  CMatrix vt(k, n);
  std::vector<double> superb(static_cast<std::size_t>(k));
  const lapack_int info =
      LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', m, n, as_lapack(work.data()),
                     m, out.S.data(), as_lapack(u.data()), m,
                     as_lapack(vt.data()), k, superb.data());
  if (info != 0) {
    throw Error(ErrorCode::SvdFailure,
                "zgesvd failed with info=" + std::to_string(info));
  }
  out.U = std::move(u);
  out.V = vt.adjoint();
  return out;
}

RVector singular_values(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  RVector s(k);
  if (k == 0) return s;
  CMatrix work = a;
  std::vector<double> superb(static_cast<std::size_t>(k));
  const lapack_int info =
      LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'N', 'N', m, n, as_lapack(work.data()),
                     m, s.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) {
    throw Error(ErrorCode::SvdFailure,
                "zgesvd failed with info=" + std::to_string(info));
  }
  return s;
}

HermitianEigen hermitian_eigen(const CMatrix& h) {
  if (h.rows() != h.cols()) {
    throw Error(ErrorCode::InvalidArgument, "hermitian_eigen: matrix not square");
  }
  const lapack_int n = static_cast<lapack_int>(h.rows());
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 0) return out;
  CMatrix work = h;
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(
      LAPACK_COL_MAJOR, 'V', 'A', 'L', n, as_lapack(work.data()), n, 0.0, 0.0,
      0, 0, 0.0, &found, out.values.data(), as_lapack(out.vectors.data()), n,
      support.data());
  if (info != 0 || found != n) {
    throw Error(ErrorCode::SvdFailure,
                "zheevr failed with info=" + std::to_string(info));
  }
  return out;
}

CMatrix lu_solve(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows()) {
    throw Error(ErrorCode::InvalidArgument, "lu_solve: dimension mismatch");
  }
  const lapack_int n = static_cast<lapack_int>(a.rows());
  const lapack_int nrhs = static_cast<lapack_int>(b.cols());
  if (n == 0) return b;
  CMatrix lu = a;
  CMatrix x = b;
  std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  const lapack_int info =
      LAPACKE_zgesv(LAPACK_COL_MAJOR, n, nrhs, as_lapack(lu.data()), n,
                    ipiv.data(), as_lapack(x.data()), n);
  if (info > 0) {
    throw Error(ErrorCode::SingularSystem,
                "lu_solve: exactly singular pivot at " + std::to_string(info));
  }
  if (info < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "lu_solve: bad argument " + std::to_string(-info));
  }
  double rcond = 0.0;
  LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, as_lapack(lu.data()), n, anorm,
                 &rcond);
  if (!(rcond > 1e-14)) {
    throw Error(ErrorCode::SingularSystem,
                "lu_solve: matrix is numerically singular (rcond=" +
                    std::to_string(rcond) + ")");
  }
  return x;
}

double relative_frobenius(const CMatrix& a, const CMatrix& b) {
  const double denom = std::max(b.norm(), 1e-300);
  return (a - b).norm() / denom;
}

double hermiticity_defect(const CMatrix& a) {
  const double nrm = a.norm();
  if (nrm == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / nrm;
}

void set_blas_threads(int n) { openblas_set_num_threads(n < 1 ? 1 : n); }

}  // namespace ccg
