#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/mpfr.hpp>

#include "qkr/bessel.hpp"

namespace {

using boost::multiprecision::mpfr_float;

// Power series sum_k (-1)^k (z/2)^{2k+n} / (k! (k+n)!) with enough digits to
// absorb the e^z cancellation.
double series_j(int n, double z) {
  const unsigned digits = 40 + static_cast<unsigned>(z / 2.3) + static_cast<unsigned>(n / 2);
  mpfr_float::default_precision(digits);
  const mpfr_float half = mpfr_float(z) / 2;
  const mpfr_float h2 = half * half;
  mpfr_float term = 1;
  for (int k = 1; k <= n; ++k) term *= half / k;
  mpfr_float sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= -h2 / (mpfr_float(k) * (k + n));
    sum += term;
    if (k > z / 2 && abs(term) < abs(sum) * pow(mpfr_float(10), -static_cast<long>(digits) + 5)) break;
  }
  return static_cast<double>(sum);
}

void check_against_series(int n, double z) {
  const double ours = qkr::bessel_j(n, z);
  const double ref = series_j(n, z);
  INFO("n=" << n << " z=" << z << " ours=" << ours << " ref=" << ref);
  if (std::abs(ref) > 1e-200) {
    CHECK(std::abs(ours - ref) <= 1e-13 + 1e-10 * std::abs(ref));
  } else {
    CHECK(std::abs(ours) <= 1e-200);
  }
}

}  // namespace

TEST_CASE("bessel: small argument and low orders") {
  CHECK(qkr::bessel_j(0, 0.0) == doctest::Approx(1.0));
  CHECK(qkr::bessel_j(3, 0.0) == 0.0);
  for (double z : {0.1, 1.0, 2.5, 10.0})
    for (int n : {0, 1, 2, 5, 17}) check_against_series(n, z);
}

TEST_CASE("bessel: negative orders follow the reflection rule") {
  for (int n : {1, 2, 7, 30}) CHECK(qkr::bessel_j(-n, 12.3) == doctest::Approx((n % 2 ? -1 : 1) * qkr::bessel_j(n, 12.3)));
}

TEST_CASE("bessel: large arguments across the turning point") {
  for (int n : {0, 1, 50, 113, 200, 226, 227, 260, 300}) check_against_series(n, 227.0);
  for (int n : {0, 651, 1200, 1303, 1304, 1340, 1400}) check_against_series(n, 1303.8);
}

TEST_CASE("bessel: table obeys the normalisation sum rule") {
  for (double z : {0.5, 40.0, 1303.8}) {
    const int top = qkr::bessel_truncation_order(z);
    const auto j = qkr::bessel_j_table(top, z);
    double s = j[0];
    for (int k = 2; k <= top; k += 2) s += 2 * j[k];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    double sq = j[0] * j[0];
    for (int k = 1; k <= top; ++k) sq += 2 * j[k] * j[k];
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("bessel: truncation order leaves only negligible tails") {
  for (double z : {1.0, 20.4, 227.0, 1303.8, 5000.0}) {
    const int m = qkr::bessel_truncation_order(z);
    INFO("z=" << z << " m=" << m);
    CHECK(std::abs(series_j(m + 1, z)) < 1e-16);
  }
  // A fixed margin of 40 orders beyond z is visibly short at this argument.
  const double z = 1303.8;
  CHECK(std::abs(series_j(static_cast<int>(std::ceil(z)) + 40, z)) > 1e-14);
}
