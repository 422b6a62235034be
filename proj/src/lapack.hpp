#pragma once

// Thin LAPACKE wrappers on Eigen column-major storage. Failures surface as
// ConvergenceError with the routine name and LAPACK info code.

#include "qkr/types.hpp"

namespace qkr::lapack {

// Hermitian eigenproblem (zheevd). `a` is replaced by its eigenvectors,
// eigenvalues ascending in `w`. Only the lower triangle of `a` is read.
void hermitian_eigen(CMatrix& a, RVector& w);

// Complex Schur form (zgees): a = Z T Z^dagger. `a` is replaced by T.
void schur(CMatrix& a, CVector& w, CMatrix& z);

// General eigenproblem (zgeev), right eigenvectors with unit 2-norm.
// `a` is destroyed.
void general_eigen(CMatrix& a, CVector& w, CMatrix& vr);

}  // namespace qkr::lapack
