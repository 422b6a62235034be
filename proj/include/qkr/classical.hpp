#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qkr {

// Point on the unit torus [0,1)^2 (xbar = x / 2pi, pbar = p / 2pi).
struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

// p' = p + K/(2 pi) sin(2 pi x) mod 1, x' = x + p' mod 1.
PhasePoint standard_map_step(PhasePoint point, double K);

// Streaming N_c x N_c occupation histogram on the unit torus.
class CoarseHistogram {
 public:
  explicit CoarseHistogram(int Nc);

  void add(PhasePoint point);
  int Nc() const { return nc_; }
  long long points() const { return points_; }
  // (sum_j (n_j / n_T)^2)^{-1}
  double area() const;
  // Row-major (p row, x column) 0/1 occupancy.
  std::vector<std::uint8_t> occupied() const;

 private:
  int nc_;
  long long points_ = 0;
  std::vector<std::uint32_t> counts_;
};

double coarse_area(std::span<const PhasePoint> trajectory, int Nc);

// Area of the orbit of `start` over n_points iterates (the start itself excluded).
double orbit_area(PhasePoint start, double K, int Nc, long long n_points);
std::vector<std::uint8_t> orbit_occupancy(PhasePoint start, double K, int Nc, long long n_points);

struct ClassicalParams {
  double K = 2.0;
  int Nc = 100;
  int n_init = 10000;
  long long n_T = 1000000;
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const;
};

struct ClassicalAreaEntry {
  int rank = 0;          // 1..n_init
  double label = 0.0;    // rank / n_init
  double area = 0.0;
  PhasePoint start;
};

struct ClassicalAreaSpectrum {
  int Nc = 0;
  std::vector<ClassicalAreaEntry> entries;  // ascending area

  std::vector<double> areas() const;
};

// Initial point of trajectory `index` under `seed`: a private RNG stream per
// (seed, index), so results do not depend on scheduling.
PhasePoint random_initial_point(std::uint64_t seed, std::uint64_t index);

ClassicalAreaSpectrum classical_area_spectrum(const ClassicalParams& params);

struct DiffusionEstimate {
  double coefficient = 0.0;  // <(p_n - p_0)^2> / n, kick K sin x
  int trajectories_used = 0;
  int trajectories_total = 0;
};

// Momentum diffusion of the unbounded standard map p' = p + K sin x,
// x' = x + p' (mod 2 pi). Trajectories whose torus projection stays on a
// small set (islands) are excluded, so the estimate refers to the chaotic sea.
DiffusionEstimate diffusion_coefficient(double K, int n_traj, long long n_T, std::uint64_t seed);

}  // namespace qkr
