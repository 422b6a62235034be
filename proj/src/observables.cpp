#include "qkr/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qkr/kernels.hpp"
#include "qkr/propagator.hpp"

namespace qkr {

double area(std::span<const double> probabilities) {
  double sum = 0.0;
  for (double p : probabilities) sum += p * p;
  if (!(sum > 0.0)) throw std::invalid_argument("area: distribution has zero weight");
  return 1.0 / sum;
}

double area(const PhaseSpaceDistribution& dist) { return area(std::span<const double>(dist.grid)); }

RMatrix cell_probabilities(const EigenDecomposition& eig, const WannierBasis& basis) {
  if (eig.eigenvectors.rows() < basis.offset() + basis.dim())
    throw std::invalid_argument("cell_probabilities: eigenvectors shorter than the basis window");
  return kernels::omp::wannier_probabilities(basis, eig.eigenvectors);
}

namespace {
long long tie_key(double v) { return std::llround(v * 1e8); }
}  // namespace

const AreaEntry& AreaSpectrum::at_label(double label) const {
  if (entries.empty()) throw std::out_of_range("AreaSpectrum: empty");
  long long rank = std::llround(label * dim);
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(entries.size()));
  return entries[static_cast<std::size_t>(rank - 1)];
}

std::vector<double> AreaSpectrum::areas() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.area);
  return out;
}

AreaSpectrum area_spectrum(const RMatrix& probs, const RVector& quasi_energies, double hbar) {
  const int n = static_cast<int>(probs.cols());
  if (quasi_energies.size() != n) throw std::invalid_argument("area_spectrum: dimension mismatch");
  std::vector<double> areas(n);
  for (int k = 0; k < n; ++k) areas[k] = 1.0 / probs.col(k).squaredNorm();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const long long ka = tie_key(areas[a]), kb = tie_key(areas[b]);
    if (ka != kb) return ka < kb;
    if (quasi_energies[a] != quasi_energies[b]) return quasi_energies[a] < quasi_energies[b];
    return a < b;
  });

  AreaSpectrum out;
  out.dim = n;
  out.hbar = hbar;
  out.entries.reserve(n);
  for (int r = 0; r < n; ++r) {
    const int k = order[r];
    out.entries.push_back({k, r + 1, static_cast<double>(r + 1) / n, areas[k], quasi_energies[k]});
  }
  return out;
}

AreaSpectrum area_spectrum(const EigenDecomposition& eig, const WannierBasis& basis, double hbar) {
  if (eig.dim() != basis.dim()) throw std::invalid_argument("area_spectrum: dimension mismatch");
  return area_spectrum(cell_probabilities(eig, basis), eig.quasi_energies, hbar);
}

DeffResult effective_dimension(std::span<const AreaSpectrum> series, double label) {
  DeffResult out;
  out.label = label;
  std::set<double> distinct;
  for (const auto& s : series) {
    if (!(s.hbar > 0.0)) throw std::invalid_argument("effective_dimension: spectrum without hbar");
    out.points.emplace_back(s.hbar, s.at_label(label).area);
    distinct.insert(s.hbar);
  }
  if (distinct.size() < 4) {
    std::ostringstream msg;
    msg << "effective_dimension needs at least 4 distinct hbar values, got " << distinct.size();
    throw InsufficientData(msg.str());
  }
  const double n = static_cast<double>(out.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [h, a] : out.points) {
    mx += std::log(h);
    my += std::log(a);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [h, a] : out.points) {
    const double dx = std::log(h) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(a) - my);
  }
  out.slope = sxy / sxx;
  out.d_eff = -2.0 * out.slope;
  const double intercept = my - out.slope * mx;
  double ss = 0.0;
  for (const auto& [h, a] : out.points) {
    const double r = std::log(a) - (intercept + out.slope * std::log(h));
    ss += r * r;
  }
  out.residual = std::sqrt(ss / n);
  return out;
}

std::vector<double> CellLengthMap::sorted_lengths() const {
  std::vector<double> out = lengths;
  std::sort(out.begin(), out.end());
  return out;
}

CellLengthMap cell_lengths(const RMatrix& probs, int Nx, int Np) {
  const int n = static_cast<int>(probs.rows());
  if (n != Nx * Np) throw std::invalid_argument("cell_lengths: dimension mismatch");
  CellLengthMap out;
  out.Nx = Nx;
  out.Np = Np;
  out.lengths.resize(n);
  out.labels.resize(n);
  for (int c = 0; c < n; ++c) out.lengths[c] = 1.0 / probs.row(c).squaredNorm();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const long long ka = tie_key(out.lengths[a]), kb = tie_key(out.lengths[b]);
    return ka != kb ? ka < kb : a < b;
  });
  for (int r = 0; r < n; ++r) out.labels[order[r]] = static_cast<double>(r + 1) / n;
  return out;
}

CellLengthMap cell_lengths(const EigenDecomposition& eig, const WannierBasis& basis) {
  if (eig.dim() != basis.dim()) throw std::invalid_argument("cell_lengths: dimension mismatch");
  return cell_lengths(cell_probabilities(eig, basis), basis.Nx(), basis.Np());
}

double demarcation_point(std::span<const double> sorted_areas, double capacity, double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw std::invalid_argument("demarcation_point: threshold fraction must lie in (0, 1)");
  const double threshold = threshold_fraction * capacity;
  const std::size_t n = sorted_areas.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted_areas[i] >= threshold) return i == 0 ? 0.0 : static_cast<double>(i + 1) / n;
  }
  return 1.0;
}

double demarcation_point(const AreaSpectrum& spec, double threshold_fraction) {
  const auto a = spec.areas();
  return demarcation_point(a, static_cast<double>(spec.dim), threshold_fraction);
}

long long quasi_energy_difference_collisions(const RVector& quasi_energies, double tol, std::span<const double> weights,
                                             double weight_floor) {
  std::vector<double> w;
  for (Eigen::Index k = 0; k < quasi_energies.size(); ++k)
    if (weights.empty() || weights[k] > weight_floor) w.push_back(quasi_energies[k]);
  const std::size_t m = w.size();
  if (m < 2) return 0;
  std::vector<double> diffs;
  diffs.reserve(m * (m - 1));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      double d = std::fmod(w[a] - w[b], kTwoPi);
      if (d < 0) d += kTwoPi;
      diffs.push_back(d);
    }
  std::sort(diffs.begin(), diffs.end());
  long long collisions = 0;
  for (std::size_t i = 1; i < diffs.size(); ++i)
    if (diffs[i] - diffs[i - 1] < tol) ++collisions;
  if (diffs.front() + kTwoPi - diffs.back() < tol) ++collisions;
  return collisions;
}

OrbitArea long_time_area_diagonal(std::span<const double> weights, const RMatrix& probs, bool check_degeneracy,
                                  const RVector& quasi_energies) {
  const Eigen::Index n = probs.cols();
  if (static_cast<Eigen::Index>(weights.size()) != n)
    throw std::invalid_argument("long_time_area_diagonal: weight count differs from state count");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("long_time_area_diagonal: coefficients are not normalised");

  const Eigen::Map<const RVector> w(weights.data(), n);
  const RVector q = probs * w;
  const double first = 2.0 * q.squaredNorm();
  double second = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) second += w[k] * w[k] * probs.col(k).squaredNorm();

  OrbitArea out;
  out.value = 1.0 / (first - second);
  if (check_degeneracy) out.degeneracy_warning = quasi_energy_difference_collisions(quasi_energies, 1e-10, weights, 1e-8) > 0;
  return out;
}

OrbitArea long_time_area_diagonal(const CVector& coeffs, const EigenDecomposition& eig, const WannierBasis& basis) {
  if (coeffs.size() != eig.dim()) throw std::invalid_argument("long_time_area_diagonal: dimension mismatch");
  std::vector<double> w(coeffs.size());
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) w[k] = std::norm(coeffs[k]);
  return long_time_area_diagonal(w, cell_probabilities(eig, basis), true, eig.quasi_energies);
}

std::vector<double> long_time_area_cells(const RMatrix& probs) {
  const RMatrix overlap = probs * probs.transpose();  // sum_phi p(c',phi) p(c,phi)
  const RVector inverse_areas = probs.cwiseAbs2().colwise().sum().transpose();
  const RVector second = probs.cwiseAbs2() * inverse_areas;
  std::vector<double> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index c = 0; c < probs.rows(); ++c) out[c] = 1.0 / (2.0 * overlap.col(c).squaredNorm() - second[c]);
  return out;
}

namespace {

template <typename Step>
double direct_average(const CVector& initial, Step&& step, const WannierBasis& basis, std::span<const int> times) {
  if (times.empty()) throw std::invalid_argument("long_time_area_direct: empty time list");
  std::vector<int> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0) throw std::invalid_argument("long_time_area_direct: negative time");

  CVector psi = initial;
  int now = 0;
  double sum = 0.0;
  for (int t : sorted) {
    while (now < t) {
      step(psi);
      ++now;
    }
    const CVector amp = basis.amplitudes(psi);
    sum += amp.cwiseAbs2().squaredNorm();
  }
  return static_cast<double>(sorted.size()) / sum;
}

}  // namespace

double long_time_area_direct(const CVector& initial, const FloquetMatrix& v, const WannierBasis& basis,
                             std::span<const int> times) {
  CVector next(initial.size());
  return direct_average(
      initial,
      [&](CVector& psi) {
        next.noalias() = v.entries * psi;
        psi.swap(next);
      },
      basis, times);
}

double long_time_area_direct(const CVector& initial, const SplitStepPropagator& v, const WannierBasis& basis,
                             std::span<const int> times) {
  return direct_average(
      initial, [&](CVector& psi) { v.step({psi.data(), static_cast<std::size_t>(psi.size())}); }, basis, times);
}

std::vector<int> log_spaced_times(int lo, int hi, int count) {
  if (lo < 1 || hi < lo || count < 1) throw std::invalid_argument("log_spaced_times: need 1 <= lo <= hi, count >= 1");
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    const int t = static_cast<int>(std::lround(lo * std::pow(static_cast<double>(hi) / lo, f)));
    if (out.empty() || t != out.back()) out.push_back(t);
  }
  return out;
}

namespace {
std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && v[order[j]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}
}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal-length samples");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace qkr
