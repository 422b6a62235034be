// One line per acceptance criterion. Usage: acceptance [criterion numbers...]
// (no arguments runs all twelve). Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qkr/classical.hpp"
#include "qkr/floquet.hpp"
#include "qkr/generic_hbar.hpp"
#include "qkr/observables.hpp"
#include "qkr/propagator.hpp"
#include "qkr/wannier.hpp"

using namespace qkr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Eigendecompositions at hbar = 2 pi / Nx^2 are shared between criteria.
struct Solved {
  ModelParams params;
  EigenDecomposition eig;
  RMatrix probs;
};

std::map<std::pair<double, int>, std::shared_ptr<const Solved>> cache;

std::shared_ptr<const Solved> solved(double K, int Nx, bool keep = true) {
  const auto key = std::make_pair(K, Nx);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto s = std::make_shared<Solved>();
  s->params = square_params(K, Nx);
  s->eig = diagonalize(build_v(s->params));
  s->probs = cell_probabilities(s->eig, build_basis(Nx, Nx));
  if (keep) cache[key] = s;
  return s;
}

AreaSpectrum spectrum_of(const Solved& s) { return area_spectrum(s.probs, s.eig.quasi_energies, s.params.hbar()); }

Outcome c1_structure() {
  double v_unit = 0, eig_unit = 0, w_unit = 0, trans = 0;
  for (double K : {0.0, 2.0, 5.0})
    for (int Nx : {16, 32}) {
      const ModelParams p = square_params(K, Nx);
      const FloquetMatrix v = build_v(p);
      v_unit = std::max(v_unit, unitarity_defect(v.entries));
      const EigenDecomposition eig = diagonalize(v);
      // Rayleigh quotients give the eigenvalues independently of the stored quasi-energies.
      const CMatrix vphi = v.entries * eig.eigenvectors;
      for (int k = 0; k < eig.dim(); ++k) {
        const Complex lam = eig.eigenvectors.col(k).dot(vphi.col(k));
        eig_unit = std::max(eig_unit, std::abs(std::abs(lam) - 1.0));
      }
      const CMatrix w = build_basis(Nx, Nx).dense();
      w_unit = std::max(w_unit, (w * w.adjoint() - CMatrix::Identity(p.dim(), p.dim())).cwiseAbs().maxCoeff());
      trans = std::max(trans, check_translation_symmetry(p, 500, 11, 1.0).max_deviation);
    }
  Outcome o;
  o.pass = v_unit < 1e-10 && eig_unit < 1e-10 && w_unit < 1e-12 && trans < 1e-12;
  o.detail = fmt("|V'V-I| %.2e, ||lambda|-1| %.2e, |WW'-I| %.2e, translation %.2e", v_unit, eig_unit, w_unit, trans);
  return o;
}

Outcome c2_free_rotor() {
  double worst = 0;
  for (int Nx : {16, 32, 64}) {
    const ModelParams p = square_params(0.0, Nx);
    const auto spec = area_spectrum(diagonalize(build_v(p)), build_basis(Nx, Nx));
    for (const auto& e : spec.entries) worst = std::max(worst, std::abs(e.area - Nx));
  }
  return {worst < 1e-8, fmt("max |A - Nx| = %.2e over Nx = 16, 32, 64", worst)};
}

Outcome c3_step() {
  const auto s64 = spectrum_of(*solved(2.0, 64));
  const auto s32 = spectrum_of(*solved(2.0, 32));
  const double r64 = s64.at_label(0.9).area / s64.at_label(0.1).area;
  const double r32 = s32.at_label(0.9).area / s32.at_label(0.1).area;
  return {r64 > 10 && r64 > r32, fmt("A(0.9)/A(0.1) = %.3f at Nx=64, %.3f at Nx=32", r64, r32)};
}

Outcome c4_deff() {
  std::vector<AreaSpectrum> series;
  for (int Nx : {16, 24, 32, 48, 64}) series.push_back(spectrum_of(*solved(2.0, Nx)));
  const auto lo = effective_dimension(series, 0.1);
  const auto hi = effective_dimension(series, 0.9);

  // synthetic power laws with known exponents
  std::vector<AreaSpectrum> synth;
  for (int Nx : {16, 24, 32, 48, 64}) {
    AreaSpectrum s;
    s.dim = Nx * Nx;
    s.hbar = kTwoPi / s.dim;
    for (int r = 1; r <= s.dim; ++r) {
      const double label = static_cast<double>(r) / s.dim;
      const double d = label < 0.3 ? 1.0 : (label < 0.7 ? 1.5 : 2.0);
      s.entries.push_back({r - 1, r, label, 0.7 * std::pow(s.hbar, -d / 2), 0.0});
    }
    synth.push_back(s);
  }
  double synth_err = 0;
  synth_err = std::max(synth_err, std::abs(effective_dimension(synth, 0.1).d_eff - 1.0));
  synth_err = std::max(synth_err, std::abs(effective_dimension(synth, 0.5).d_eff - 1.5));
  synth_err = std::max(synth_err, std::abs(effective_dimension(synth, 0.9).d_eff - 2.0));
  Outcome o;
  o.pass = lo.d_eff >= 0.7 && lo.d_eff <= 1.3 && hi.d_eff >= 1.7 && hi.d_eff <= 2.3 && synth_err < 1e-6;
  o.detail = fmt("D_eff(0.1) = %.3f, D_eff(0.9) = %.3f, synthetic error %.1e", lo.d_eff, hi.d_eff, synth_err);
  return o;
}

Outcome c5_duality() {
  const auto s = solved(2.0, 32);
  const auto spec = spectrum_of(*s);
  const auto lengths = cell_lengths(s->probs, 32, 32);
  double a = 0, l = 0;
  for (double v : spec.areas()) a += 1 / v;
  for (double v : lengths.lengths) l += 1 / v;
  const double rel = std::abs(a - l) / a;
  return {rel < 1e-8, fmt("sum 1/L = %.12f, sum 1/A = %.12f, relative %.1e", l, a, rel)};
}

Outcome c6_diagonal_vs_direct() {
  const auto s = solved(2.0, 32);
  const WannierBasis basis = build_basis(32, 32);
  const SplitStepPropagator prop(s->params);
  const auto times = log_spaced_times(100, 10000, 64);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, basis.dim() - 1);
  double worst = 0;
  int warnings = 0;
  for (int k = 0; k < 20; ++k) {
    const int c = pick(rng);
    const CVector init = basis.state(c % 32, c / 32);
    const CVector coeffs = s->eig.eigenvectors.adjoint() * init;
    const OrbitArea diag = long_time_area_diagonal(coeffs, s->eig, basis);
    warnings += diag.degeneracy_warning ? 1 : 0;
    const double direct = long_time_area_direct(init, prop, basis, times);
    worst = std::max(worst, std::abs(diag.value - direct) / direct);
  }
  return {worst < 0.15, fmt("max relative difference %.3f over 20 cells, %zu times (degeneracy warnings: %d)", worst,
                            times.size(), warnings)};
}

Outcome c7_length_orbit() {
  const auto s = solved(2.0, 64);
  const auto lengths = cell_lengths(s->probs, 64, 64);
  const auto orbit = long_time_area_cells(s->probs);
  const double rho = spearman(lengths.lengths, orbit);
  return {rho > 0.9, fmt("Spearman(L, A_orbit) = %.4f", rho)};
}

double fit_exponent(const std::vector<int>& nc, const std::vector<double>& area) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < nc.size(); ++i) {
    mx += std::log(nc[i]);
    my += std::log(area[i]);
  }
  mx /= nc.size();
  my /= nc.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < nc.size(); ++i) {
    sxx += (std::log(nc[i]) - mx) * (std::log(nc[i]) - mx);
    sxy += (std::log(nc[i]) - mx) * (std::log(area[i]) - my);
  }
  return sxy / sxx;
}

Outcome c8_classical() {
  const std::vector<int> grids{50, 100, 200};
  const long long n_T = 100000;
  // inside the island around the elliptic point (1/2, 0); next to the hyperbolic point (0, 0)
  const PhasePoint island{0.56, 0.0}, sea{0.01, 0.01};
  std::vector<double> ai, ac;
  for (int Nc : grids) {
    ai.push_back(orbit_area(island, 2.0, Nc, n_T));
    ac.push_back(orbit_area(sea, 2.0, Nc, n_T));
  }
  const bool labels_ok = ai.back() < 10.0 * 200 && ac.back() >= 10.0 * 200;
  const double ei = fit_exponent(grids, ai), ec = fit_exponent(grids, ac);

  double worst_fraction = 1.0;
  for (std::uint64_t seed : {0ULL, 1ULL}) {
    const auto spec = classical_area_spectrum(ClassicalParams{10.0, 100, 1000, n_T, seed});
    int big = 0;
    for (double a : spec.areas()) big += a > 0.5 * 100 * 100 ? 1 : 0;
    worst_fraction = std::min(worst_fraction, big / 1000.0);
  }
  Outcome o;
  o.pass = labels_ok && ei >= 0.7 && ei <= 1.3 && ec >= 1.7 && ec <= 2.3 && worst_fraction >= 0.99;
  o.detail = fmt("island exponent %.3f, chaotic exponent %.3f, K=10 fraction above Nc^2/2 = %.3f", ei, ec,
                 worst_fraction);
  if (!labels_ok) o.detail += " (reference orbits misclassified)";
  return o;
}

Outcome c9_demarcation() {
  const std::vector<double> Ks{1.0, 1.5, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> q, c;
  for (double K : Ks) {
    const auto s = solved(K, 64, K == 2.0);
    q.push_back(demarcation_point(spectrum_of(*s), 0.018));
    if (K <= 2.0) {
      const auto cs = classical_area_spectrum(ClassicalParams{K, 100, 2000, 200000, 5});
      c.push_back(demarcation_point(cs.areas(), 100.0 * 100.0, 0.018));
    }
  }
  int inversions = 0;
  bool small = true;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[i - 1]) {
      ++inversions;
      small = small && q[i] - q[i - 1] <= 0.02;
    }
  bool above = true;
  for (std::size_t i = 0; i < c.size(); ++i) above = above && q[i] >= c[i];
  std::ostringstream d;
  d << "quantum lc";
  for (double v : q) d << " " << fmt("%.4f", v);
  d << "; classical lc (K<=2)";
  for (double v : c) d << " " << fmt("%.4f", v);
  d << "; inversions " << inversions;
  return {inversions <= 1 && small && above, d.str()};
}

Outcome c10_generic() {
  const RationalApprox approx = rational_sequence(26, 1.0 / std::sqrt(2.0), 8, 8000);
  const auto spectra = resonant_scan(approx, 2.0);
  std::vector<double> half, low;
  for (const auto& s : spectra) {
    half.push_back(s.at_label(0.5).area);
    low.push_back(s.at_label(0.1).area);
  }
  const std::size_t n = half.size();
  bool grows = n >= 4 && half.back() > half.front();
  const double last_change = n >= 2 ? std::abs(half[n - 1] - half[n - 2]) / half[n - 2] : 1.0;
  const double low_spread = *std::max_element(low.begin(), low.end()) / *std::min_element(low.begin(), low.end());
  std::ostringstream d;
  d << n << " terms N =";
  for (const auto& t : approx.terms) d << " " << 26 * t.Np;
  d << "; A(0.5) =";
  for (double v : half) d << " " << fmt("%.1f", v);
  d << "; A(0.1) =";
  for (double v : low) d << " " << fmt("%.2f", v);
  d << fmt("; last change %.3f, A(0.1) spread %.3f", last_change, low_spread);
  return {grows && last_change <= 0.25 && low_spread <= 2.0, d.str()};
}

Outcome c11_truncated() {
  TruncatedParams p;
  p.K = 2.0;
  p.Nx = 26;
  p.delta = 1.0 / std::sqrt(2.0);
  p.n_cut = 4000;
  p.window_center = 2000;
  const TruncatedSpectrum t = truncated_spectrum(p);
  const double ratio = t.median_ratio();
  const double shift = t.max_shift_change();
  int large = 0;
  for (const auto& s : t.selected) large += s.cls;
  return {ratio > 5 && shift < 0.05,
          fmt("%zu of %d central states kept; medians %.2f / %.2f (ratio %.2f, %d large); max window-shift change %.4f",
              t.selected.size(), t.candidates, t.median_small, t.median_large, ratio, large, shift)};
}

Outcome c12_semiclassical() {
  std::vector<double> fraction, mean;
  for (int Nx : {32, 128}) {
    const ModelParams p = square_params(2.0, Nx);
    const SplitStepPropagator prop(p);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> pick(0, Nx - 1);
    std::vector<Cell> cells;
    for (int k = 0; k < 20; ++k) cells.push_back({pick(rng), pick(rng)});
    const auto report = semiclassical_map_check(prop, WannierBasis(Nx, Nx), cells);
    fraction.push_back(report.fraction_within_one_cell());
    mean.push_back(report.mean_displacement_fraction(Nx));
  }
  return {fraction[1] >= 0.9 && mean[1] <= mean[0],
          fmt("within one cell %.2f at Nx=128; mean displacement %.4f (Nx=32) vs %.4f (Nx=128) of the torus side",
              fraction[1], mean[0], mean[1])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"unitarity and structure", c1_structure},
      {"free rotor areas equal Nx", c2_free_rotor},
      {"sharp step in the sorted area", c3_step},
      {"effective dimension plateaus", c4_deff},
      {"length/area sum rule", c5_duality},
      {"diagonal ensemble vs direct evolution", c6_diagonal_vs_direct},
      {"cell length tracks long-time area", c7_length_orbit},
      {"classical area scaling", c8_classical},
      {"demarcation point trend", c9_demarcation},
      {"saturation along rational approximants", c10_generic},
      {"truncated operator class separation", c11_truncated},
      {"semiclassical map concentration", c12_semiclassical},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
