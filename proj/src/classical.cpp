#include "qkr/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qkr/kernels.hpp"
#include "qkr/types.hpp"

namespace qkr {

namespace {
inline double wrap_unit(double v) { return v - std::floor(v); }

inline int bin(double v, int n) {
  int b = static_cast<int>(v * n);
  return b >= n ? n - 1 : (b < 0 ? 0 : b);
}
}  // namespace

PhasePoint standard_map_step(PhasePoint point, double K) {
  const double p = wrap_unit(point.p + K / kTwoPi * std::sin(kTwoPi * point.x));
  const double x = wrap_unit(point.x + p);
  return {x, p};
}

CoarseHistogram::CoarseHistogram(int Nc) : nc_(Nc), counts_(static_cast<std::size_t>(Nc) * Nc, 0) {
  if (Nc < 1) throw std::invalid_argument("CoarseHistogram: Nc must be positive");
}

void CoarseHistogram::add(PhasePoint point) {
  const int bx = bin(wrap_unit(point.x), nc_);
  const int bp = bin(wrap_unit(point.p), nc_);
  ++counts_[static_cast<std::size_t>(bp) * nc_ + bx];
  ++points_;
}

double CoarseHistogram::area() const {
  if (points_ == 0) throw std::invalid_argument("CoarseHistogram: empty trajectory");
  const double n = static_cast<double>(points_);
  double sum = 0.0;
  for (std::uint32_t c : counts_) {
    if (c == 0) continue;
    const double f = c / n;
    sum += f * f;
  }
  return 1.0 / sum;
}

std::vector<std::uint8_t> CoarseHistogram::occupied() const {
  std::vector<std::uint8_t> out(counts_.size());
  std::transform(counts_.begin(), counts_.end(), out.begin(), [](std::uint32_t c) { return c > 0 ? 1 : 0; });
  return out;
}

double coarse_area(std::span<const PhasePoint> trajectory, int Nc) {
  CoarseHistogram h(Nc);
  for (const auto& pt : trajectory) h.add(pt);
  return h.area();
}

double orbit_area(PhasePoint start, double K, int Nc, long long n_points) {
  CoarseHistogram h(Nc);
  PhasePoint pt = start;
  for (long long t = 0; t < n_points; ++t) {
    pt = standard_map_step(pt, K);
    h.add(pt);
  }
  return h.area();
}

std::vector<std::uint8_t> orbit_occupancy(PhasePoint start, double K, int Nc, long long n_points) {
  CoarseHistogram h(Nc);
  PhasePoint pt = start;
  for (long long t = 0; t < n_points; ++t) {
    pt = standard_map_step(pt, K);
    h.add(pt);
  }
  return h.occupied();
}

std::vector<std::string> ClassicalParams::violations() const {
  std::vector<std::string> out;
  if (!(K >= 0.0) || !std::isfinite(K)) out.emplace_back("K must be a finite non-negative number");
  if (Nc < 2) out.emplace_back("Nc must be at least 2");
  if (n_init < 1) out.emplace_back("n_init must be at least 1");
  if (n_T < 1) out.emplace_back("n_T must be at least 1");
  return out;
}

std::vector<double> ClassicalAreaSpectrum::areas() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.area);
  return out;
}

PhasePoint random_initial_point(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = u(rng);
  const double p = u(rng);
  return {x, p};
}

ClassicalAreaSpectrum classical_area_spectrum(const ClassicalParams& params) {
  const auto v = params.violations();
  if (!v.empty()) throw ConfigError("invalid classical parameters: " + v.front());

  std::vector<double> x0(params.n_init), p0(params.n_init);
  for (int i = 0; i < params.n_init; ++i) {
    const auto pt = random_initial_point(params.seed, static_cast<std::uint64_t>(i));
    x0[i] = pt.x;
    p0[i] = pt.p;
  }
  const auto areas = kernels::omp::orbit_areas(x0, p0, params.K, params.Nc, params.n_T);

  std::vector<int> order(params.n_init);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return areas[a] < areas[b]; });

  ClassicalAreaSpectrum out;
  out.Nc = params.Nc;
  out.entries.reserve(params.n_init);
  for (int r = 0; r < params.n_init; ++r) {
    const int i = order[r];
    out.entries.push_back({r + 1, static_cast<double>(r + 1) / params.n_init, areas[i], {x0[i], p0[i]}});
  }
  return out;
}

DiffusionEstimate diffusion_coefficient(double K, int n_traj, long long n_T, std::uint64_t seed) {
  if (n_traj < 1 || n_T < 1) throw std::invalid_argument("diffusion_coefficient: need n_traj, n_T >= 1");
  DiffusionEstimate out;
  out.trajectories_total = n_traj;
  if (K == 0.0) {
    out.trajectories_used = n_traj;
    return out;
  }

  // Island filter: an orbit confined to a torus or island chain covers far
  // fewer cells than the chaotic sea at this resolution.
  constexpr int kFilterNc = 50;
  const long long filter_points = std::min<long long>(n_T, 20000);
  const double island_area = 10.0 * kFilterNc;

  double sum_sq = 0.0;
  int used = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : sum_sq, used)
  for (int i = 0; i < n_traj; ++i) {
    const PhasePoint start = random_initial_point(seed, static_cast<std::uint64_t>(i));
    double x = kTwoPi * start.x;
    double p = kTwoPi * start.p;
    const double p_start = p;
    CoarseHistogram h(kFilterNc);
    for (long long t = 0; t < n_T; ++t) {
      p += K * std::sin(x);
      x = std::fmod(x + p, kTwoPi);
      if (x < 0) x += kTwoPi;
      if (t < filter_points) h.add({x / kTwoPi, (p - kTwoPi * std::floor(p / kTwoPi)) / kTwoPi});
    }
    if (h.area() < island_area) continue;
    const double dp = p - p_start;
    sum_sq += dp * dp;
    ++used;
  }
  out.trajectories_used = used;
  out.coefficient = used > 0 ? sum_sq / used / static_cast<double>(n_T) : 0.0;
  return out;
}

}  // namespace qkr
