#include "qkr/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "qkr/types.hpp"

namespace qkr {

double ModelParams::hbar() const { return kTwoPi * static_cast<double>(M) / static_cast<double>(dim()); }

std::vector<std::string> ModelParams::violations() const {
  std::vector<std::string> out;
  if (!(K >= 0.0) || !std::isfinite(K)) out.emplace_back("K must be a finite non-negative number");
  if (M < 1) out.emplace_back("M must be a positive integer");
  if (Nx < 1) out.emplace_back("Nx must be a positive integer");
  if (Np < 1) out.emplace_back("Np must be a positive integer");
  if (!(theta >= 0.0 && theta < kTwoPi)) out.emplace_back("theta must lie in [0, 2pi)");
  if (M >= 1 && Nx >= 1 && Np >= 1) {
    const long long n = static_cast<long long>(Nx) * Np;
    if (n % 2 != 0) out.emplace_back("N must be even");
    if (std::gcd(static_cast<long long>(M), n) != 1) out.emplace_back("M, N must be coprime");
  }
  return out;
}

void ModelParams::require_valid() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid model parameters:";
  for (const auto& s : v) msg << ' ' << s << ';';
  throw ConfigError(msg.str());
}

ModelParams square_params(double K, int Nx) {
  ModelParams p;
  p.K = K;
  p.M = 1;
  p.Nx = Nx;
  p.Np = Nx;
  return p;
}

}  // namespace qkr
