#pragma once

#include <vector>

namespace qkr {

// J_0(z) .. J_max_order(z) for real z >= 0 by Miller's downward recurrence,
// normalised with J_0 + 2 sum_k J_2k = 1. Stable for orders far above and
// far below z; values below the double range come back as 0.
std::vector<double> bessel_j_table(int max_order, double z);

// Single integer-order value, any sign of order (J_-n = (-1)^n J_n).
double bessel_j(int order, double z);

// Smallest order m such that the table needed for the kick kernel, truncated
// at |order| <= m, drops only terms far below double precision.
int bessel_truncation_order(double z);

}  // namespace qkr
