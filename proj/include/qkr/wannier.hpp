#pragma once

#include <span>
#include <vector>

#include "qkr/floquet.hpp"
#include "qkr/types.hpp"

namespace qkr {

class SplitStepPropagator;

// Phase-space Wannier basis |X,P> = Nx^{-1/2} sum_{n=1}^{Nx} exp(-2 pi i X n / Nx) |n + P Nx>.
//
// Stored sparsely: row (X,P) touches only the Nx momentum labels n + P*Nx, so
// the only data kept is the Nx x Nx coefficient table. `offset` shifts the
// whole window inside a larger momentum register (array index of label 1),
// which is how a local basis is laid over a truncated momentum space.
// Cells are flattened as c = P * Nx + X.
class WannierBasis {
 public:
  WannierBasis(int Nx, int Np, long long offset = 0);

  int Nx() const { return nx_; }
  int Np() const { return np_; }
  int dim() const { return nx_ * np_; }
  long long offset() const { return offset_; }

  int cell(int X, int P) const { return P * nx_ + X; }

  // <n + P Nx | X, P> for n = 1..Nx.
  Complex coefficient(int X, int n) const { return table_[static_cast<std::size_t>(X) * nx_ + (n - 1)]; }
  // Array index (in the host register) of momentum label n + P*Nx.
  long long index(int P, int n) const { return offset_ + static_cast<long long>(P) * nx_ + (n - 1); }

  // <X,P|psi> for every cell, psi indexed like the host register.
  CVector amplitudes(std::span<const Complex> psi) const;
  CVector amplitudes(const CVector& psi) const { return amplitudes(std::span<const Complex>(psi.data(), psi.size())); }
  // Momentum-space vector of |X,P>, length `host_dim` (defaults to dim() + offset).
  CVector state(int X, int P, long long host_dim = -1) const;
  // Dense transform W with W(c, i) = <X,P|i>; only for small tests.
  CMatrix dense() const;

 private:
  int nx_;
  int np_;
  long long offset_;
  std::vector<Complex> table_;
};

WannierBasis build_basis(int Nx, int Np);

// Closed form of <x|X,P> with <x|n> = e^{inx}/sqrt(2 pi); the removable
// singularity at x = 2 pi X / Nx is evaluated by its Taylor limit.
Complex x_representation(int X, int P, double x, int Nx);

struct PhaseSpaceDistribution {
  int Nx = 0;
  int Np = 0;
  std::vector<double> grid;  // grid[P * Nx + X] = |<X,P|psi>|^2

  double at(int X, int P) const { return grid[static_cast<std::size_t>(P) * Nx + X]; }
  double total() const;
};

PhaseSpaceDistribution project(std::span<const Complex> state, const WannierBasis& basis);
inline PhaseSpaceDistribution project(const CVector& state, const WannierBasis& basis) {
  return project(std::span<const Complex>(state.data(), state.size()), basis);
}

// Image of (Xbar0, Pbar0) under one kick of the resonant rotor in unit
// phase-space coordinates: Pbar = Pbar0 + K/(2 pi M) sin(2 pi Xbar0), Xbar = Xbar0 + M Pbar.
struct UnitPoint {
  double x = 0.0;
  double p = 0.0;
};
UnitPoint resonant_map_image(UnitPoint start, double K, int M);

struct MapCheckEntry {
  int X0 = 0, P0 = 0;
  double X_expected = 0.0, P_expected = 0.0;  // in cell units
  int X_argmax = 0, P_argmax = 0;
  int dX = 0, dP = 0;  // cyclic offsets argmax - rounded image
  double peak_probability = 0.0;

  int displacement() const { return std::max(std::abs(dX), std::abs(dP)); }
  bool within_one_cell() const { return std::abs(dX) <= 1 && std::abs(dP) <= 1; }
};

struct MapCheckReport {
  std::vector<MapCheckEntry> entries;
  double fraction_within_one_cell() const;
  double mean_displacement_cells() const;
  // Mean displacement as a fraction of the torus side (resolution-independent).
  double mean_displacement_fraction(int Nx) const;
};

struct Cell {
  int X = 0;
  int P = 0;
};

// Propagates each |X0,P0> one period and compares the argmax cell of
// |<X,P|V|X0,P0>|^2 with the classical map image.
MapCheckReport semiclassical_map_check(const FloquetMatrix& v, const WannierBasis& basis,
                                       std::span<const Cell> cells);
MapCheckReport semiclassical_map_check(const SplitStepPropagator& v, const WannierBasis& basis,
                                       std::span<const Cell> cells);

}  // namespace qkr
