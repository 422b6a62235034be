#pragma once

#include <cstdint>

#include "qkr/model.hpp"
#include "qkr/types.hpp"

namespace qkr {

// <n_row| U |n_col> = (-i)^{n_col-n_row} J_{n_col-n_row}(K/hbar) exp(-i n_row^2 hbar / 2).
// The rotation phase is reduced with integer arithmetic, so translating both
// indices by N is exact whenever the resonance conditions hold.
Complex u_element(long long n_row, long long n_col, const ModelParams& params);

// Same matrix element for an arbitrary (possibly irrational) hbar.
Complex u_element(long long n_row, long long n_col, double K, double hbar);

struct SymmetryReport {
  int samples = 0;
  double max_deviation = 0.0;
};

// Samples random pairs (n, n') and compares U_{n+N,n'+N} with U_{n,n'}.
// Throws SymmetryViolation if any deviation exceeds `tolerance`.
SymmetryReport check_translation_symmetry(const ModelParams& params, int samples,
                                          std::uint64_t seed = 0, double tolerance = 1e-12);

// Bloch-reduced one-period operator V_theta in the momentum basis.
// Row/column i carries momentum label s = i + 1, s = 1..N.
struct FloquetMatrix {
  ModelParams params;
  CMatrix entries;
  int truncation_order = 0;  // largest retained |Bessel order|

  int dim() const { return static_cast<int>(entries.rows()); }
};

// Throws ConfigError on invalid parameters and TruncationError when the
// first dropped Bessel term exceeds 1e-14.
FloquetMatrix build_v(const ModelParams& params);

// max_ij |(V^dagger V - I)_ij|
double unitarity_defect(const CMatrix& v);

struct EigenDecomposition {
  RVector quasi_energies;  // omega in [0, 2 pi), eigenvalue exp(-i omega)
  CMatrix eigenvectors;    // unit-norm columns
  RVector residuals;       // || V phi - exp(-i omega) phi ||_2

  int dim() const { return static_cast<int>(quasi_energies.size()); }
  double max_residual() const { return residuals.size() ? residuals.maxCoeff() : 0.0; }
  Complex eigenvalue(int k) const { return std::polar(1.0, -quasi_energies[k]); }
};

enum class EigenMethod {
  automatic,  // parity-split Hermitian route at theta = 0, plain Hermitian route otherwise
  parity,     // split into reflection-even/odd blocks (theta = 0 only)
  hermitian,  // eigenvectors of (V + V^dagger)/2, near-degenerate clusters resolved on V
  schur,      // complex Schur form of the full matrix (reference route)
};

// Eigenpairs of the unitary V. Exactly degenerate quasi-energies are resolved
// in the momentum basis, so a diagonal V yields momentum eigenvectors.
// Throws ConvergenceError when LAPACK fails or a residual exceeds 1e-6.
EigenDecomposition diagonalize(const FloquetMatrix& v, EigenMethod method = EigenMethod::automatic);

// V^steps * state by repeated multiplication.
CVector apply_v(const FloquetMatrix& v, const CVector& state, int steps);

// max_ij |V - Phi diag(e^{-i omega}) Phi^dagger|
double reconstruction_error(const FloquetMatrix& v, const EigenDecomposition& eig);

}  // namespace qkr
