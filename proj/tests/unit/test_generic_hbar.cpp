#include <doctest.h>

#include <cmath>
#include <numeric>

#include <boost/multiprecision/mpfr.hpp>

#include "qkr/generic_hbar.hpp"

using namespace qkr;
using boost::multiprecision::mpfr_float;

namespace {

struct Frac {
  long long p, q;
};

mpfr_float target_ratio(int Nx, double delta) {
  mpfr_float::default_precision(80);
  const mpfr_float b = mpfr_float(Nx) + mpfr_float(delta);
  return mpfr_float(Nx) / (b * b);
}

std::vector<long long> partial_quotients(mpfr_float x, int n) {
  std::vector<long long> a;
  for (int k = 0; k < n; ++k) {
    const mpfr_float f = floor(x);
    a.push_back(f.convert_to<long long>());
    x = 1 / (x - f);
  }
  return a;
}

std::vector<Frac> convergents(const std::vector<long long>& a) {
  std::vector<Frac> out;
  long long p0 = 1, q0 = 0, p1 = a[0], q1 = 1;
  out.push_back({p1, q1});
  for (std::size_t k = 1; k < a.size(); ++k) {
    const long long p2 = a[k] * p1 + p0, q2 = a[k] * q1 + q0;
    out.push_back({p2, q2});
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return out;
}

bool valid(long long p, long long q, int Nx) { return (Nx * q) % 2 == 0 && std::gcd(p, Nx * q) == 1; }

}  // namespace

TEST_CASE("generic: exactly resonant target gives a single exact term") {
  const auto r = rational_sequence(26, 0.0, 4);
  REQUIRE(r.terms.size() == 1);
  CHECK(r.terms[0].M == 1);
  CHECK(r.terms[0].Np == 26);
  CHECK(r.terms[0].delta_hbar < 1e-30);
  CHECK(r.hbar_target == doctest::Approx(2 * kPi / 676));
}

TEST_CASE("generic: approximants of an irrational offset") {
  const int Nx = 26;
  const double delta = 1.0 / std::sqrt(2.0);
  const mpfr_float r = target_ratio(Nx, delta);
  const auto a = partial_quotients(r, 8);
  CHECK(a == std::vector<long long>{0, 27, 2, 3, 3, 1, 9, 4});
  const auto conv = convergents(a);

  const auto seq = rational_sequence(Nx, delta, 10, 8000);
  REQUIRE(seq.terms.size() >= 4);
  CHECK(seq.terms[0].M == 1);
  CHECK(seq.terms[0].Np == 27);
  CHECK(seq.terms[3].M == 7);
  CHECK(seq.terms[3].Np == 192);
  CHECK(!seq.notes.empty());

  // every valid convergent inside the cap is present
  for (const auto& c : conv) {
    if (c.p == 0 || Nx * c.q > 8000 || !valid(c.p, c.q, Nx)) continue;
    bool found = false;
    for (const auto& t : seq.terms) found = found || (t.M == c.p && t.Np == c.q);
    CHECK(found);
  }

  double prev = 1e9;
  for (const auto& t : seq.terms) {
    CHECK(valid(t.M, t.Np, Nx));
    CHECK(Nx * t.Np <= 8000);
    CHECK(t.delta_hbar < prev);
    prev = t.delta_hbar;
    // best approximation among valid fractions with no larger denominator
    const mpfr_float err = abs(r - mpfr_float(t.M) / t.Np);
    for (long long q = 1; q <= t.Np; ++q) {
      const long long p = llround(static_cast<double>(r * q));
      for (long long pp : {p - 1, p, p + 1}) {
        if (pp < 1 || !valid(pp, q, Nx) || (pp == t.M && q == t.Np)) continue;
        CHECK(abs(r - mpfr_float(pp) / q) > err);
      }
    }
    const double hb = 2 * kPi * t.M / (Nx * static_cast<double>(t.Np));
    CHECK(t.hbar == doctest::Approx(hb).epsilon(1e-14));
    CHECK(t.delta_hbar == doctest::Approx(std::abs(hb - seq.hbar_target)).epsilon(1e-6));
  }
}

TEST_CASE("generic: input validation") {
  CHECK_THROWS_AS(rational_sequence(25, 0.3, 3), ConfigError);
  CHECK_THROWS_AS(rational_sequence(26, 1.0, 3), ConfigError);
  CHECK_THROWS_AS(rational_sequence(26, 0.3, 0), ConfigError);
  CHECK_THROWS_AS(rational_sequence(26, 0.7, 3, 100), NoValidConvergent);
}

TEST_CASE("generic: localization length") {
  CHECK(localization_length(0.0, 0.3) == 0.0);
  CHECK(localization_length(2.0, 1.0) == 1.0);
}

TEST_CASE("generic: otsu split of two clusters") {
  const double t = otsu_threshold({1.0, 1.1, 0.9, 10.0, 11.0, 9.0});
  CHECK(t > 1.1);
  CHECK(t < 9.0);
}

TEST_CASE("generic: truncated operator without kicks") {
  const CMatrix u = truncated_u(0.0, 0.01, 50);
  CHECK(std::abs(u(9, 9) - std::exp(Complex(0, -0.5 * 100 * 0.01))) < 1e-14);
  CHECK(std::abs(u(9, 10)) == 0.0);

  TruncatedParams p;
  p.K = 0.0;
  p.Nx = 4;
  p.delta = 0.3;
  p.n_cut = 300;
  p.window_center = 150;
  p.min_selected = 1;
  const auto t = truncated_spectrum(p);
  CHECK(t.local_dim() == 48);
  int inside = 0;
  for (const auto& s : t.selected) {
    if (s.mean_n <= t.offset || s.mean_n > t.offset + 48) continue;
    ++inside;
    CHECK(s.area == doctest::Approx(4.0).epsilon(1e-12));
  }
  CHECK(inside == 48);
}

TEST_CASE("generic: truncated operator is unitary away from its edges") {
  const double hbar = 2 * kPi / std::pow(10.3, 2);
  const CMatrix u = truncated_u(1.0, hbar, 200);
  const CMatrix g = u.adjoint() * u;
  const int e = 60;
  CHECK((g.block(e, e, 200 - 2 * e, 200 - 2 * e) - CMatrix::Identity(200 - 2 * e, 200 - 2 * e)).cwiseAbs().maxCoeff() <
        1e-12);
}
