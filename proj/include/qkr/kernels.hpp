#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP version with the same signature; the library calls the OpenMP one,
// the tests pin them against each other and bench/ times both.

#include <span>
#include <vector>

#include "qkr/types.hpp"

namespace qkr {
class WannierBasis;
}

namespace qkr::kernels {

namespace serial {
// out(i, j) = row_phase[i] * kick[j - i + N - 1]
void fill_floquet(std::span<const Complex> row_phase, std::span<const Complex> kick, CMatrix& out);
// probs(c, k) = |<cell c | states.col(k)>|^2
RMatrix wannier_probabilities(const WannierBasis& basis, const CMatrix& states);
// Coarse-grained area of each standard-map orbit on the unit torus.
std::vector<double> orbit_areas(std::span<const double> x0, std::span<const double> p0, double K, int Nc,
                                long long n_points);
}  // namespace serial

namespace omp {
void fill_floquet(std::span<const Complex> row_phase, std::span<const Complex> kick, CMatrix& out);
RMatrix wannier_probabilities(const WannierBasis& basis, const CMatrix& states);
std::vector<double> orbit_areas(std::span<const double> x0, std::span<const double> p0, double K, int Nc,
                                long long n_points);
}  // namespace omp

}  // namespace qkr::kernels
