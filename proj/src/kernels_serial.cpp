#include <cassert>

#include "qkr/classical.hpp"
#include "qkr/kernels.hpp"
#include "qkr/wannier.hpp"

namespace qkr::kernels::serial {

void fill_floquet(std::span<const Complex> row_phase, std::span<const Complex> kick, CMatrix& out) {
  const Eigen::Index n = static_cast<Eigen::Index>(row_phase.size());
  assert(kick.size() == static_cast<std::size_t>(2 * n - 1));
  out.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = row_phase[i] * kick[j - i + n - 1];
}

RMatrix wannier_probabilities(const WannierBasis& basis, const CMatrix& states) {
  const int nx = basis.Nx();
  const int np = basis.Np();
  RMatrix probs(basis.dim(), states.cols());
  for (Eigen::Index k = 0; k < states.cols(); ++k) {
    for (int P = 0; P < np; ++P) {
      for (int X = 0; X < nx; ++X) {
        Complex amp = 0.0;
        for (int n = 1; n <= nx; ++n) amp += std::conj(basis.coefficient(X, n)) * states(basis.index(P, n), k);
        probs(basis.cell(X, P), k) = std::norm(amp);
      }
    }
  }
  return probs;
}

std::vector<double> orbit_areas(std::span<const double> x0, std::span<const double> p0, double K, int Nc,
                                long long n_points) {
  std::vector<double> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = orbit_area({x0[i], p0[i]}, K, Nc, n_points);
  return out;
}

}  // namespace qkr::kernels::serial
