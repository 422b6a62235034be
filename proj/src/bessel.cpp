#include "qkr/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace qkr {

namespace {
constexpr double kRescaleAbove = 1e250;
constexpr double kRescaleBy = 1e-250;
}  // namespace

int bessel_truncation_order(double z) {
  // Past the turning point J_{z+a}(z) ~ Ai(2^{1/3} a / z^{1/3}), so the
  // margin must grow like z^{1/3}; a fixed margin fails for z ~ 10^3.
  z = std::abs(z);
  return static_cast<int>(std::ceil(z)) + 40 + static_cast<int>(std::ceil(10.0 * std::cbrt(z)));
}

std::vector<double> bessel_j_table(int max_order, double z) {
  if (max_order < 0) throw std::invalid_argument("bessel_j_table: negative max_order");
  if (z < 0) throw std::invalid_argument("bessel_j_table: negative argument");

  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (z == 0.0) {
    out[0] = 1.0;
    return out;
  }

  const int top = std::max(max_order, static_cast<int>(std::ceil(z)));
  int start = top + 40 + static_cast<int>(std::ceil(15.0 * std::cbrt(static_cast<double>(top))));
  if (start % 2 != 0) ++start;

  double next = 0.0;    // f_{k+1}
  double cur = 1e-30;   // f_k, k = start
  double norm = 0.0;    // f_0 + 2 sum f_{2k}
  const double two_over_z = 2.0 / z;
  for (int k = start; k > 0; --k) {
    if (k <= max_order) out[k] = cur;
    if (k % 2 == 0) norm += 2.0 * cur;
    const double prev = k * two_over_z * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > kRescaleAbove) {
      cur *= kRescaleBy;
      next *= kRescaleBy;
      norm *= kRescaleBy;
      for (int j = k; j <= std::min(max_order, start); ++j) out[j] *= kRescaleBy;
    }
  }
  out[0] = cur;
  norm += cur;
  for (double& v : out) v /= norm;
  return out;
}

double bessel_j(int order, double z) {
  const int n = std::abs(order);
  double sign = 1.0;
  if (z < 0) {
    z = -z;
    if (n % 2 != 0) sign = -sign;
  }
  if (order < 0 && n % 2 != 0) sign = -sign;
  return sign * bessel_j_table(n, z)[static_cast<std::size_t>(n)];
}

}  // namespace qkr
