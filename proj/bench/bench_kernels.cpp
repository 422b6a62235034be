// Serial reference kernels against their OpenMP counterparts.
// OMP_NUM_THREADS controls the parallel side.

#include <benchmark/benchmark.h>

#include <random>

#include "qkr/kernels.hpp"
#include "qkr/wannier.hpp"

using namespace qkr;

namespace {

std::vector<Complex> random_complex(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& c : v) c = {g(rng), g(rng)};
  return v;
}

template <auto Kernel>
void fill_floquet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto phase = random_complex(n, 1);
  const auto kick = random_complex(2 * n - 1, 2);
  CMatrix out(n, n);
  for (auto _ : state) {
    Kernel(phase, kick, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * sizeof(Complex));
}

template <auto Kernel>
void wannier_probabilities(benchmark::State& state) {
  const int nx = static_cast<int>(state.range(0));
  const WannierBasis basis(nx, nx);
  CMatrix states(basis.dim(), 256);
  const auto data = random_complex(static_cast<std::size_t>(states.size()), 3);
  std::copy(data.begin(), data.end(), states.data());
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(basis, states));
}

template <auto Kernel>
void orbit_areas(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  std::vector<double> x(n), p(n);
  for (int i = 0; i < n; ++i) {
    x[i] = u(rng);
    p[i] = u(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, p, 2.0, 100, 20000));
  state.SetItemsProcessed(state.iterations() * n * 20000LL);
}

}  // namespace

BENCHMARK(fill_floquet<kernels::serial::fill_floquet>)->Name("fill_floquet/serial")->Arg(1024)->Arg(2048);
BENCHMARK(fill_floquet<kernels::omp::fill_floquet>)->Name("fill_floquet/omp")->Arg(1024)->Arg(2048);
BENCHMARK(wannier_probabilities<kernels::serial::wannier_probabilities>)->Name("wannier_probabilities/serial")->Arg(32)->Arg(64);
BENCHMARK(wannier_probabilities<kernels::omp::wannier_probabilities>)->Name("wannier_probabilities/omp")->Arg(32)->Arg(64);
BENCHMARK(orbit_areas<kernels::serial::orbit_areas>)->Name("orbit_areas/serial")->Arg(64);
BENCHMARK(orbit_areas<kernels::omp::orbit_areas>)->Name("orbit_areas/omp")->Arg(64);

BENCHMARK_MAIN();
