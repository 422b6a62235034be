#include "lapack.hpp"

#include <lapacke.h>

#include <string>

namespace qkr::lapack {

namespace {
lapack_complex_double* as_lapack(Complex* p) { return reinterpret_cast<lapack_complex_double*>(p); }

void check(lapack_int info, const char* routine) {
  if (info != 0) throw ConvergenceError(std::string(routine) + " failed with info = " + std::to_string(info));
}
}  // namespace

void hermitian_eigen(CMatrix& a, RVector& w) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  if (n == 0) return;
  check(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, as_lapack(a.data()), n, w.data()), "zheevd");
}

void schur(CMatrix& a, CVector& w, CMatrix& z) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  z.resize(n, n);
  if (n == 0) return;
  lapack_int sdim = 0;
  check(LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, as_lapack(a.data()), n, &sdim, as_lapack(w.data()),
                      as_lapack(z.data()), n),
        "zgees");
}

void general_eigen(CMatrix& a, CVector& w, CMatrix& vr) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  vr.resize(n, n);
  if (n == 0) return;
  check(LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, as_lapack(a.data()), n, as_lapack(w.data()), nullptr, n,
                      as_lapack(vr.data()), n),
        "zgeev");
}

}  // namespace qkr::lapack
