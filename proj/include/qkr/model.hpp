#pragma once

#include <string>
#include <vector>

namespace qkr {

// Resonant kicked-rotor parameters: hbar_e = 2 pi M / N with N = Nx * Np.
struct ModelParams {
  double K = 0.0;
  int M = 1;
  int Nx = 1;
  int Np = 1;
  double theta = 0.0;  // Bloch phase along p

  int dim() const { return Nx * Np; }
  double hbar() const;
  // Bessel argument K / hbar_e.
  double kick_argument() const { return K / hbar(); }

  // Every violated invariant, phrased for the user. Empty means valid.
  std::vector<std::string> violations() const;
  // Throws ConfigError listing all violations.
  void require_valid() const;
};

// Parameters of the hbar_e = 2 pi / Nx^2 family used throughout: M = 1, Np = Nx.
ModelParams square_params(double K, int Nx);

}  // namespace qkr
