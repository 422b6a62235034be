#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qkr/floquet.hpp"
#include "qkr/types.hpp"
#include "qkr/wannier.hpp"

namespace qkr {

class SplitStepPropagator;

// (sum p^2)^{-1} over the raw cell probabilities.
double area(const PhaseSpaceDistribution& dist);
double area(std::span<const double> probabilities);

// |<X,P|phi>|^2 for every cell (rows) and eigenstate (columns).
RMatrix cell_probabilities(const EigenDecomposition& eig, const WannierBasis& basis);

struct AreaEntry {
  int index = 0;        // eigenstate column in the decomposition
  int rank = 0;         // 1..N
  double label = 0.0;   // rank / N
  double area = 0.0;
  double quasi_energy = 0.0;
};

struct AreaSpectrum {
  int dim = 0;
  double hbar = 0.0;
  std::vector<AreaEntry> entries;  // ascending area

  // Entry nearest to label * N (rank clamped to [1, N]).
  const AreaEntry& at_label(double label) const;
  std::vector<double> areas() const;
};

// Sort key: area rounded to 1e-8, then quasi-energy, then original index, so
// exact ties (K = 0) order deterministically.
// `hbar` is carried along for effective_dimension.
AreaSpectrum area_spectrum(const EigenDecomposition& eig, const WannierBasis& basis, double hbar = 0.0);
AreaSpectrum area_spectrum(const RMatrix& probs, const RVector& quasi_energies, double hbar = 0.0);

struct DeffResult {
  double label = 0.0;
  double slope = 0.0;     // d ln A / d ln hbar
  double d_eff = 0.0;     // -2 slope
  double residual = 0.0;  // rms of the ln A fit residuals
  std::vector<std::pair<double, double>> points;  // (hbar, area)
};

// Ordinary least squares of ln A against ln hbar at fixed label.
// Throws InsufficientData with fewer than four distinct hbar values.
DeffResult effective_dimension(std::span<const AreaSpectrum> series, double label);

struct CellLengthMap {
  int Nx = 0;
  int Np = 0;
  std::vector<double> lengths;  // per cell c = P * Nx + X
  std::vector<double> labels;   // l_W = rank / N, ascending length

  double at(int X, int P) const { return lengths[static_cast<std::size_t>(P) * Nx + X]; }
  std::vector<double> sorted_lengths() const;
};

CellLengthMap cell_lengths(const EigenDecomposition& eig, const WannierBasis& basis);
CellLengthMap cell_lengths(const RMatrix& probs, int Nx, int Np);

// Smallest label with area >= fraction * N. 0 if the first entry already
// qualifies, 1 if none does.
double demarcation_point(const AreaSpectrum& spec, double threshold_fraction = 0.018);
// Same rule on an ascending list of areas whose maximum possible value is `capacity`.
double demarcation_point(std::span<const double> sorted_areas, double capacity, double threshold_fraction);

// Number of distinct ordered pairs (a,b) != (c,d) whose quasi-energy
// differences coincide mod 2 pi within `tol`. Only states whose weight
// exceeds `weight_floor` take part when weights are given.
long long quasi_energy_difference_collisions(const RVector& quasi_energies, double tol = 1e-10,
                                             std::span<const double> weights = {}, double weight_floor = 0.0);

struct OrbitArea {
  double value = 0.0;
  bool degeneracy_warning = false;
};

// Long-time area from the diagonal ensemble:
// A^{-1} = 2 sum_c (sum_phi |a|^2 p_c)^2 - sum_c sum_phi |a|^4 p_c^2.
OrbitArea long_time_area_diagonal(const CVector& coeffs, const EigenDecomposition& eig, const WannierBasis& basis);
OrbitArea long_time_area_diagonal(std::span<const double> weights, const RMatrix& probs, bool check_degeneracy,
                                  const RVector& quasi_energies);

// Diagonal-ensemble long-time area of every Wannier cell taken as the
// initial state (weights |<phi|X,P>|^2 are the rows of `probs`).
std::vector<double> long_time_area_cells(const RMatrix& probs);

// Brute-force counterpart: the inverse of the time-averaged sum of fourth
// powers, evolving `initial` explicitly through the listed periods.
double long_time_area_direct(const CVector& initial, const FloquetMatrix& v, const WannierBasis& basis,
                             std::span<const int> times);
double long_time_area_direct(const CVector& initial, const SplitStepPropagator& v, const WannierBasis& basis,
                             std::span<const int> times);

// `count` distinct integers, log-spaced over [lo, hi].
std::vector<int> log_spaced_times(int lo, int hi, int count);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace qkr
