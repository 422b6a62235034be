#include "qkr/wannier.hpp"

#include <cmath>
#include <numeric>

#include "qkr/propagator.hpp"

namespace qkr {

WannierBasis::WannierBasis(int Nx, int Np, long long offset) : nx_(Nx), np_(Np), offset_(offset) {
  if (Nx < 1 || Np < 1) throw ConfigError("Wannier basis needs Nx, Np >= 1");
  if (offset < 0) throw ConfigError("Wannier basis offset must be non-negative");
  table_.resize(static_cast<std::size_t>(Nx) * Nx);
  const double norm = 1.0 / std::sqrt(static_cast<double>(Nx));
  for (int X = 0; X < Nx; ++X)
    for (int n = 1; n <= Nx; ++n) {
      // exp(-2 pi i X n / Nx) with the product reduced mod Nx first
      const long long r = (static_cast<long long>(X) * n) % Nx;
      table_[static_cast<std::size_t>(X) * Nx + (n - 1)] = std::polar(norm, -kTwoPi * static_cast<double>(r) / Nx);
    }
}

CVector WannierBasis::amplitudes(std::span<const Complex> psi) const {
  if (static_cast<long long>(psi.size()) < offset_ + dim())
    throw std::invalid_argument("WannierBasis: state shorter than the basis window");
  CVector out(dim());
  for (int P = 0; P < np_; ++P) {
    const Complex* block = psi.data() + index(P, 1);
    for (int X = 0; X < nx_; ++X) {
      Complex amp = 0.0;
      for (int n = 1; n <= nx_; ++n) amp += std::conj(coefficient(X, n)) * block[n - 1];
      out[cell(X, P)] = amp;
    }
  }
  return out;
}

CVector WannierBasis::state(int X, int P, long long host_dim) const {
  if (host_dim < 0) host_dim = offset_ + dim();
  CVector out = CVector::Zero(host_dim);
  for (int n = 1; n <= nx_; ++n) out[index(P, n)] = coefficient(X, n);
  return out;
}

CMatrix WannierBasis::dense() const {
  CMatrix w = CMatrix::Zero(dim(), offset_ + dim());
  for (int P = 0; P < np_; ++P)
    for (int X = 0; X < nx_; ++X)
      for (int n = 1; n <= nx_; ++n) w(cell(X, P), index(P, n)) = std::conj(coefficient(X, n));
  return w;
}

WannierBasis build_basis(int Nx, int Np) { return WannierBasis(Nx, Np); }

Complex x_representation(int X, int P, double x, int Nx) {
  // sum_{n=1}^{Nx} e^{iny} = e^{i(Nx+1)y/2} sin(Nx y/2) / sin(y/2), y = x - 2 pi X / Nx,
  // which is 2 pi periodic in y, so y is reduced to [-pi, pi) first.
  double y = x - kTwoPi * X / Nx;
  y -= kTwoPi * std::floor((y + kPi) / kTwoPi);
  const double nx = Nx;
  const double s = std::sin(0.5 * y);
  double ratio;
  if (std::abs(s) < 1e-8) {
    ratio = nx * (1.0 - (nx * nx - 1.0) * y * y / 24.0);
  } else {
    ratio = std::sin(0.5 * nx * y) / s;
  }
  const double phase = 0.5 * (nx + 1.0) * y + static_cast<double>(P) * nx * x;
  return std::polar(ratio / std::sqrt(kTwoPi * nx), phase);
}

double PhaseSpaceDistribution::total() const { return std::accumulate(grid.begin(), grid.end(), 0.0); }

PhaseSpaceDistribution project(std::span<const Complex> state, const WannierBasis& basis) {
  const CVector amp = basis.amplitudes(state);
  PhaseSpaceDistribution out;
  out.Nx = basis.Nx();
  out.Np = basis.Np();
  out.grid.resize(static_cast<std::size_t>(basis.dim()));
  for (int c = 0; c < basis.dim(); ++c) out.grid[c] = std::norm(amp[c]);
  return out;
}

UnitPoint resonant_map_image(UnitPoint start, double K, int M) {
  UnitPoint out;
  out.p = start.p + K / (kTwoPi * M) * std::sin(kTwoPi * start.x);
  out.x = start.x + M * out.p;
  out.p -= std::floor(out.p);
  out.x -= std::floor(out.x);
  return out;
}

double MapCheckReport::fraction_within_one_cell() const {
  if (entries.empty()) return 0.0;
  int ok = 0;
  for (const auto& e : entries) ok += e.within_one_cell() ? 1 : 0;
  return static_cast<double>(ok) / entries.size();
}

double MapCheckReport::mean_displacement_cells() const {
  if (entries.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : entries) sum += e.displacement();
  return sum / entries.size();
}

double MapCheckReport::mean_displacement_fraction(int Nx) const { return mean_displacement_cells() / Nx; }

namespace {

int cyclic_offset(int a, int b, int n) {
  int d = ((a - b) % n + n) % n;
  if (d > n / 2) d -= n;
  return d;
}

template <typename Evolve>
MapCheckReport map_check(Evolve&& evolve, int K_M, double K, const WannierBasis& basis, std::span<const Cell> cells) {
  const int nx = basis.Nx();
  const int np = basis.Np();
  MapCheckReport report;
  for (const auto& c : cells) {
    CVector psi = evolve(basis.state(c.X, c.P));
    const CVector amp = basis.amplitudes(psi);
    Eigen::Index best = 0;
    amp.cwiseAbs2().maxCoeff(&best);

    // Wannier cells are centred at x = X / Nx and at momentum (P + 1/2) / Np.
    const UnitPoint image = resonant_map_image({static_cast<double>(c.X) / nx, (c.P + 0.5) / np}, K, K_M);
    MapCheckEntry e;
    e.X0 = c.X;
    e.P0 = c.P;
    e.X_expected = image.x * nx;
    e.P_expected = image.p * np - 0.5;
    e.X_argmax = static_cast<int>(best % nx);
    e.P_argmax = static_cast<int>(best / nx);
    const int x_round = static_cast<int>(std::lround(e.X_expected)) % nx;
    const int p_round = ((static_cast<int>(std::lround(e.P_expected)) % np) + np) % np;
    e.dX = cyclic_offset(e.X_argmax, x_round, nx);
    e.dP = cyclic_offset(e.P_argmax, p_round, np);
    e.peak_probability = std::norm(amp[best]);
    report.entries.push_back(e);
  }
  return report;
}

}  // namespace

MapCheckReport semiclassical_map_check(const FloquetMatrix& v, const WannierBasis& basis, std::span<const Cell> cells) {
  if (v.dim() != basis.dim()) throw std::invalid_argument("semiclassical_map_check: dimension mismatch");
  return map_check([&](const CVector& s) { return CVector(v.entries * s); }, v.params.M, v.params.K, basis, cells);
}

MapCheckReport semiclassical_map_check(const SplitStepPropagator& v, const WannierBasis& basis,
                                       std::span<const Cell> cells) {
  if (v.dim() != basis.dim()) throw std::invalid_argument("semiclassical_map_check: dimension mismatch");
  return map_check([&](const CVector& s) { return v.apply(s, 1); }, v.params().M, v.params().K, basis, cells);
}

}  // namespace qkr
