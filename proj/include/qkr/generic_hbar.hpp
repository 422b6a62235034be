#pragma once

#include <string>
#include <vector>

#include "qkr/floquet.hpp"
#include "qkr/observables.hpp"
#include "qkr/types.hpp"

namespace qkr {

// One resonant approximant hbar_j = 2 pi M / (Nx Np) of hbar_e = 2 pi / (Nx + delta)^2.
struct RationalTerm {
  int M = 1;
  int Np = 1;
  double hbar = 0.0;
  double delta_hbar = 0.0;  // |hbar_e - hbar_j|
  bool convergent = true;   // false for an intermediate fraction standing in for an invalid convergent
};

struct RationalApprox {
  int Nx = 0;
  double delta = 0.0;
  double hbar_target = 0.0;
  std::vector<RationalTerm> terms;
  std::vector<std::string> notes;  // skipped convergents and their substitutes
};

// Continued-fraction approximants of Nx / (Nx + delta)^2 (computed with 50
// significant digits), keeping only those with gcd(M, Nx Np) = 1 and strictly
// decreasing delta_hbar. An invalid convergent is replaced by the valid
// intermediate fractions of its own and the following level that improve on
// the previous term. Stops after `count` terms or once Nx * Np > max_dim.
// Throws ConfigError for bad input and NoValidConvergent if nothing survives.
RationalApprox rational_sequence(int Nx, double delta, int count, int max_dim = 1 << 30);

// build_v, diagonalize and area_spectrum along the sequence.
std::vector<AreaSpectrum> resonant_scan(const RationalApprox& approx, double K,
                                        EigenMethod method = EigenMethod::automatic);

// n_loc = D_c / (2 hbar^2)
double localization_length(double diffusion, double hbar);

struct TruncatedParams {
  double K = 2.0;
  int Nx = 26;
  double delta = 0.0;
  int n_cut = 4000;
  int window_center = 2000;
  int local_Np = 0;         // defaults to 3 Nx (3 Nx^2 local states)
  double min_inside = 0.999;
  int min_selected = 10;
};

struct TruncatedState {
  int index = 0;              // eigenvector column
  Complex eigenvalue;
  double mean_n = 0.0;
  double inside_weight = 0.0;  // weight away from the truncation edges
  double area = 0.0;           // (sum p)^2 / sum p^2 over the local cells
  double shifted_area = 0.0;   // same with the window moved by one state
  int cls = 0;                 // 0 small-area class, 1 large-area class
};

struct TruncatedSpectrum {
  TruncatedParams params;
  double hbar = 0.0;
  int edge = 0;           // kick coupling range excluded at both ends
  int window_lo = 0;      // central third of [1, n_cut]
  int window_hi = 0;
  long long offset = 0;   // array index of local label 1
  int candidates = 0;     // states with <n> in the window
  std::vector<TruncatedState> selected;
  CMatrix states;         // selected eigenvectors, n_cut rows, label n at row n - 1
  double class_threshold = 0.0;  // on ln area
  double median_small = 0.0;
  double median_large = 0.0;

  int local_dim() const { return params.Nx * params.local_Np; }
  double median_ratio() const { return median_large / median_small; }
  double max_shift_change() const;
};

// Dense truncated U on momentum labels 1..n_cut for arbitrary hbar.
CMatrix truncated_u(double K, double hbar, int n_cut);

// (sum p)^2 / sum p^2 of the cell probabilities, without renormalising psi.
double normalized_area(std::span<const Complex> psi, const WannierBasis& basis);

// Threshold maximising the between-class variance of `values`.
double otsu_threshold(std::vector<double> values);

// Throws TruncationError when fewer than min_selected states pass the leakage guard.
TruncatedSpectrum truncated_spectrum(const TruncatedParams& params);

}  // namespace qkr
