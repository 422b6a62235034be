#include <cassert>
#include <vector>

#include "qkr/classical.hpp"
#include "qkr/kernels.hpp"
#include "qkr/wannier.hpp"

namespace qkr::kernels::omp {

void fill_floquet(std::span<const Complex> row_phase, std::span<const Complex> kick, CMatrix& out) {
  const Eigen::Index n = static_cast<Eigen::Index>(row_phase.size());
  assert(kick.size() == static_cast<std::size_t>(2 * n - 1));
  out.resize(n, n);
  const Complex* phase = row_phase.data();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) {
    Complex* col = out.col(j).data();
    const Complex* k = kick.data() + j + n - 1;  // k[-i] = kick[j - i + n - 1]
    for (Eigen::Index i = 0; i < n; ++i) col[i] = phase[i] * k[-i];
  }
}

RMatrix wannier_probabilities(const WannierBasis& basis, const CMatrix& states) {
  const int nx = basis.Nx();
  const int np = basis.Np();
  // Transposed conjugate table so the inner loop runs over contiguous n.
  std::vector<Complex> bra(static_cast<std::size_t>(nx) * nx);
  for (int X = 0; X < nx; ++X)
    for (int n = 1; n <= nx; ++n) bra[static_cast<std::size_t>(X) * nx + (n - 1)] = std::conj(basis.coefficient(X, n));

  RMatrix probs(basis.dim(), states.cols());
  const Eigen::Index cols = states.cols();
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Complex* psi = states.col(k).data();
    double* out = probs.col(k).data();
    for (int P = 0; P < np; ++P) {
      const Complex* block = psi + basis.index(P, 1);
      for (int X = 0; X < nx; ++X) {
        const Complex* b = bra.data() + static_cast<std::size_t>(X) * nx;
        double re = 0.0, im = 0.0;
        for (int n = 0; n < nx; ++n) {
          re += b[n].real() * block[n].real() - b[n].imag() * block[n].imag();
          im += b[n].real() * block[n].imag() + b[n].imag() * block[n].real();
        }
        out[basis.cell(X, P)] = re * re + im * im;
      }
    }
  }
  return probs;
}

std::vector<double> orbit_areas(std::span<const double> x0, std::span<const double> p0, double K, int Nc,
                                long long n_points) {
  std::vector<double> out(x0.size());
  const long long count = static_cast<long long>(x0.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long long i = 0; i < count; ++i) out[i] = orbit_area({x0[i], p0[i]}, K, Nc, n_points);
  return out;
}

}  // namespace qkr::kernels::omp
