#include <doctest.h>

#include <cmath>

#include "qkr/floquet.hpp"
#include "qkr/propagator.hpp"
#include "qkr/wannier.hpp"

using namespace qkr;

namespace {

// <x|X,P> summed term by term from the momentum expansion.
Complex direct_x_representation(int X, int P, double x, int Nx) {
  Complex s = 0;
  for (int n = 1; n <= Nx; ++n) s += std::exp(Complex(0, -2 * kPi * X * n / Nx + (n + P * Nx) * x));
  return s / std::sqrt(Nx * 2 * kPi);
}

}  // namespace

TEST_CASE("wannier: dense transform is unitary") {
  for (auto [nx, np] : {std::pair{4, 4}, std::pair{6, 3}, std::pair{16, 16}}) {
    const CMatrix w = build_basis(nx, np).dense();
    const int n = nx * np;
    CHECK((w * w.adjoint() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("wannier: sparse amplitudes match the dense transform") {
  const WannierBasis b(4, 3, 2);
  CVector psi = CVector::Random(14);
  const CVector amp = b.amplitudes(psi);
  const CVector ref = b.dense() * psi;
  CHECK((amp - ref).norm() < 1e-13);
  const CVector st = b.state(1, 2, 14);
  CHECK(st.norm() == doctest::Approx(1.0));
  CHECK(std::abs(b.amplitudes(st)[b.cell(1, 2)] - 1.0) < 1e-13);
}

TEST_CASE("wannier: closed-form x representation") {
  for (int Nx : {4, 7, 16})
    for (int X : {0, 1, Nx - 1})
      for (int P : {0, 2})
        for (double x : {0.0, 0.3, 1.7, 2 * kPi * X / Nx, 2 * kPi * X / Nx + 1e-9, 5.9, -2.0}) {
          const Complex a = x_representation(X, P, x, Nx);
          const Complex r = direct_x_representation(X, P, x, Nx);
          INFO("Nx=" << Nx << " X=" << X << " P=" << P << " x=" << x);
          CHECK(std::abs(a - r) < 1e-11);
        }
}

TEST_CASE("wannier: x representation is orthonormal under quadrature") {
  // Trapezoid on a uniform periodic grid is exact for these trigonometric polynomials.
  const int Nx = 5, grid = 64;
  for (auto [a, b] : {std::pair{std::pair{1, 0}, std::pair{1, 0}}, std::pair{std::pair{1, 0}, std::pair{3, 1}}}) {
    Complex s = 0;
    for (int j = 0; j < grid; ++j) {
      const double x = 2 * kPi * j / grid;
      s += std::conj(x_representation(a.first, a.second, x, Nx)) * x_representation(b.first, b.second, x, Nx);
    }
    s *= 2 * kPi / grid;
    CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) < 1e-12);
  }
}

TEST_CASE("wannier: projection of a normalised state sums to one") {
  CVector psi = CVector::Random(24);
  psi.normalize();
  const auto d = project(psi, build_basis(4, 6));
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.grid.size() == 24);
}

TEST_CASE("wannier: map image in unit coordinates") {
  const UnitPoint s{0.25, 0.1};
  const UnitPoint r = resonant_map_image(s, 2.0, 2);
  const double p = 0.1 + 2.0 / (2 * kPi * 2) * std::sin(2 * kPi * 0.25);
  const double x = std::fmod(0.25 + 2 * p, 1.0);
  CHECK(r.p == doctest::Approx(p - std::floor(p)));
  CHECK(r.x == doctest::Approx(x));
  const UnitPoint f = resonant_map_image({0.0, 0.0}, 3.0, 1);
  CHECK(f.x == doctest::Approx(0.0));
  CHECK(f.p == doctest::Approx(0.0));
}

TEST_CASE("wannier: dense and split-step map checks agree") {
  ModelParams p = square_params(2.0, 16);
  const auto v = build_v(p);
  const SplitStepPropagator prop(p);
  const auto basis = build_basis(16, 16);
  std::vector<Cell> cells{{3, 5}, {8, 8}, {12, 1}};
  const auto a = semiclassical_map_check(v, basis, cells);
  const auto b = semiclassical_map_check(prop, basis, cells);
  REQUIRE(a.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.entries[i].X_argmax == b.entries[i].X_argmax);
    CHECK(a.entries[i].P_argmax == b.entries[i].P_argmax);
    CHECK(a.entries[i].peak_probability == doctest::Approx(b.entries[i].peak_probability).epsilon(1e-10));
  }
}
