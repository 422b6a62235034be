#include <doctest.h>

#include <random>

#include "qkr/kernels.hpp"
#include "qkr/wannier.hpp"

using namespace qkr;

TEST_CASE("kernels: serial and OpenMP fill_floquet are identical") {
  const int n = 37;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<Complex> phase(n), kick(2 * n - 1);
  for (auto& c : phase) c = {g(rng), g(rng)};
  for (auto& c : kick) c = {g(rng), g(rng)};
  CMatrix a(n, n), b(n, n);
  kernels::serial::fill_floquet(phase, kick, a);
  kernels::omp::fill_floquet(phase, kick, b);
  CHECK(a == b);
  CHECK(a(3, 10) == phase[3] * kick[10 - 3 + n - 1]);
}

TEST_CASE("kernels: serial and OpenMP Wannier probabilities are identical") {
  const WannierBasis basis(6, 5, 3);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  CMatrix states(40, 9);
  for (Eigen::Index i = 0; i < states.size(); ++i) states.data()[i] = {g(rng), g(rng)};
  const RMatrix a = kernels::serial::wannier_probabilities(basis, states);
  const RMatrix b = kernels::omp::wannier_probabilities(basis, states);
  CHECK(a.rows() == 30);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  // dense transform as oracle
  const CMatrix w = basis.dense();
  const RMatrix c = (w * states.topRows(w.cols())).cwiseAbs2();
  CHECK((a - c).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kernels: serial and OpenMP orbit areas are identical") {
  std::vector<double> x{0.1, 0.3, 0.77, 0.5}, p{0.2, 0.9, 0.4, 0.5};
  const auto a = kernels::serial::orbit_areas(x, p, 2.0, 50, 20000);
  const auto b = kernels::omp::orbit_areas(x, p, 2.0, 50, 20000);
  CHECK(a == b);
}
