#include "qkr/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "lapack.hpp"
#include "qkr/bessel.hpp"
#include "qkr/kernels.hpp"

namespace qkr {

namespace {

// (-i)^m for any integer m.
Complex minus_i_power(long long m) {
  switch (((m % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

// (-i)^m J_m(z) from a table of non-negative orders.
Complex kick_term(long long m, const std::vector<double>& table) {
  const long long a = m < 0 ? -m : m;
  if (a >= static_cast<long long>(table.size())) return 0.0;
  double j = table[static_cast<std::size_t>(a)];
  if (m < 0 && (a % 2) != 0) j = -j;
  return minus_i_power(m) * j;
}

// exp(-i n^2 hbar / 2) with hbar = 2 pi M / N, reduced exactly mod 2 pi.
Complex resonant_rotation_phase(long long n, int M, long long N) {
  const __int128 two_n = 2 * static_cast<__int128>(N);
  __int128 r = static_cast<__int128>(n) * n * M % two_n;
  if (r < 0) r += two_n;
  return std::polar(1.0, -kPi * static_cast<double>(r) / static_cast<double>(N));
}

}  // namespace

Complex u_element(long long n_row, long long n_col, const ModelParams& params) {
  const long long m = n_col - n_row;
  const double z = params.kick_argument();
  const double j = bessel_j(static_cast<int>(m), z);
  return minus_i_power(m) * j * resonant_rotation_phase(n_row, params.M, params.dim());
}

Complex u_element(long long n_row, long long n_col, double K, double hbar) {
  const long long m = n_col - n_row;
  const double j = bessel_j(static_cast<int>(m), K / hbar);
  const long double angle = std::fmod(static_cast<long double>(n_row) * n_row * hbar / 2.0L, 2.0L * kPi);
  return minus_i_power(m) * j * std::polar(1.0, -static_cast<double>(angle));
}

SymmetryReport check_translation_symmetry(const ModelParams& params, int samples, std::uint64_t seed,
                                          double tolerance) {
  if (samples < 1) throw std::invalid_argument("check_translation_symmetry: samples must be positive");
  const long long N = params.dim();
  const long long reach = static_cast<long long>(std::ceil(params.kick_argument())) + 5;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long long> pick_n(-2 * N, 2 * N);
  std::uniform_int_distribution<long long> pick_d(-reach, reach);

  SymmetryReport report;
  report.samples = samples;
  for (int k = 0; k < samples; ++k) {
    const long long n = pick_n(rng);
    const long long d = k == 0 ? 0 : pick_d(rng);
    const Complex base = u_element(n, n + d, params);
    const Complex shifted = u_element(n + N, n + d + N, params);
    report.max_deviation = std::max(report.max_deviation, std::abs(shifted - base));
  }
  if (report.max_deviation > tolerance) {
    std::ostringstream msg;
    msg << "translation symmetry U(n+N, n'+N) = U(n, n') violated: max deviation " << report.max_deviation
        << " (N = " << N << ", M = " << params.M << ")";
    throw SymmetryViolation(msg.str());
  }
  return report;
}

FloquetMatrix build_v(const ModelParams& params) {
  params.require_valid();
  const int N = params.dim();
  const double z = params.kick_argument();
  const int order = bessel_truncation_order(z);
  const auto table = bessel_j_table(order + 1, z);
  const double dropped = std::abs(table[static_cast<std::size_t>(order) + 1]);
  if (dropped > 1e-14) {
    std::ostringstream msg;
    msg << "Bessel truncation at order " << order << " drops a term of size " << dropped;
    throw TruncationError(msg.str());
  }

  // kick[d + N - 1] = sum_l (-i)^m J_m(z) e^{-i l theta}, m = d + N l, |m| <= order
  std::vector<Complex> kick(static_cast<std::size_t>(2 * N - 1));
  for (long long d = -(N - 1); d <= N - 1; ++d) {
    const long long lo = static_cast<long long>(std::ceil(static_cast<double>(-order - d) / N));
    const long long hi = static_cast<long long>(std::floor(static_cast<double>(order - d) / N));
    Complex sum = 0.0;
    for (long long l = lo; l <= hi; ++l) {
      Complex term = kick_term(d + N * l, table);
      if (params.theta != 0.0 && l != 0) term *= std::polar(1.0, -static_cast<double>(l) * params.theta);
      sum += term;
    }
    kick[static_cast<std::size_t>(d + N - 1)] = sum;
  }

  std::vector<Complex> row_phase(N);
  for (int i = 0; i < N; ++i) row_phase[i] = resonant_rotation_phase(i + 1, params.M, N);

  FloquetMatrix v;
  v.params = params;
  v.truncation_order = order;
  kernels::omp::fill_floquet(row_phase, kick, v.entries);
  return v;
}

double unitarity_defect(const CMatrix& v) {
  CMatrix g = v.adjoint() * v;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

namespace {

constexpr double kClusterGap = 1e-6;       // Hermitian-part eigenvalues closer than this are resolved on V
constexpr double kDegenerateGap = 1e-10;   // eigenvalues closer than this count as degenerate
constexpr double kResidualLimit = 1e-6;

// Orthonormal eigenvectors of a unitary W. The Hermitian part (W + W^dagger)/2
// shares W's eigenvectors but merges exp(-i w) with exp(+i w); each cluster of
// nearly equal Hermitian eigenvalues is therefore re-diagonalised on W itself.
CMatrix unitary_eigenvectors(const CMatrix& w) {
  const Eigen::Index n = w.rows();
  CMatrix q = 0.5 * (w + w.adjoint());
  RVector c;
  lapack::hermitian_eigen(q, c);

  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && c[end] - c[end - 1] < kClusterGap) ++end;
    const Eigen::Index size = end - start;
    if (size > 1) {
      const CMatrix basis = q.middleCols(start, size);
      CMatrix block = basis.adjoint() * (w * basis);
      CVector lambda;
      CMatrix z;
      lapack::schur(block, lambda, z);
      q.middleCols(start, size) = basis * z;
    }
    start = end;
  }
  return q;
}

// Reflection s -> -s (mod N) on momentum labels, as sparse basis vectors of
// the even and odd sectors. Array index i carries label i + 1; labels N and
// N/2 are fixed points.
struct SectorVector {
  Eigen::Index first;
  Eigen::Index second;  // -1 for fixed points
  double second_sign;
};

std::vector<SectorVector> reflection_sector(Eigen::Index N, bool even) {
  std::vector<SectorVector> out;
  if (even) {
    out.push_back({N - 1, -1, 0.0});
    out.push_back({N / 2 - 1, -1, 0.0});
  }
  for (Eigen::Index i = 0; i < N / 2 - 1; ++i) out.push_back({i, N - 2 - i, even ? 1.0 : -1.0});
  return out;
}

CMatrix restrict_to_sector(const CMatrix& v, const std::vector<SectorVector>& sector) {
  const double r = 1.0 / std::sqrt(2.0);
  const Eigen::Index m = static_cast<Eigen::Index>(sector.size());
  CMatrix out(m, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < m; ++b) {
    const auto& ub = sector[b];
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto& ua = sector[a];
      Complex sum;
      if (ua.second < 0 && ub.second < 0) {
        sum = v(ua.first, ub.first);
      } else if (ua.second < 0) {
        sum = r * (v(ua.first, ub.first) + ub.second_sign * v(ua.first, ub.second));
      } else if (ub.second < 0) {
        sum = r * (v(ua.first, ub.first) + ua.second_sign * v(ua.second, ub.first));
      } else {
        sum = 0.5 * (v(ua.first, ub.first) + ub.second_sign * v(ua.first, ub.second) +
                     ua.second_sign * v(ua.second, ub.first) +
                     ua.second_sign * ub.second_sign * v(ua.second, ub.second));
      }
      out(a, b) = sum;
    }
  }
  return out;
}

void lift_from_sector(const CMatrix& vecs, const std::vector<SectorVector>& sector, CMatrix& out,
                      Eigen::Index first_col) {
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < vecs.cols(); ++k) {
    auto col = out.col(first_col + k);
    col.setZero();
    for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(sector.size()); ++a) {
      const auto& u = sector[a];
      if (u.second < 0) {
        col[u.first] += vecs(a, k);
      } else {
        col[u.first] += r * vecs(a, k);
        col[u.second] += r * u.second_sign * vecs(a, k);
      }
    }
  }
}

double fold_angle(double w) {
  double out = std::fmod(w, kTwoPi);
  if (out < 0) out += kTwoPi;
  if (out >= kTwoPi) out = 0.0;
  return out;
}

}  // namespace

EigenDecomposition diagonalize(const FloquetMatrix& v, EigenMethod method) {
  const CMatrix& V = v.entries;
  const Eigen::Index N = V.rows();
  if (V.cols() != N) throw std::invalid_argument("diagonalize: matrix is not square");

  if (method == EigenMethod::automatic)
    method = (v.params.theta == 0.0 && N % 2 == 0 && N >= 4) ? EigenMethod::parity : EigenMethod::hermitian;
  if (method == EigenMethod::parity && (v.params.theta != 0.0 || N % 2 != 0 || N < 4))
    throw std::invalid_argument("diagonalize: the reflection split needs theta = 0 and even N >= 4");

  CMatrix phi(N, N);
  switch (method) {
    case EigenMethod::parity: {
      const auto even = reflection_sector(N, true);
      const auto odd = reflection_sector(N, false);
      const CMatrix ve = unitary_eigenvectors(restrict_to_sector(V, even));
      lift_from_sector(ve, even, phi, 0);
      const CMatrix vo = unitary_eigenvectors(restrict_to_sector(V, odd));
      lift_from_sector(vo, odd, phi, static_cast<Eigen::Index>(even.size()));
      break;
    }
    case EigenMethod::hermitian:
      phi = unitary_eigenvectors(V);
      break;
    case EigenMethod::schur: {
      CMatrix t = V;
      CVector lambda;
      lapack::schur(t, lambda, phi);
      break;
    }
    case EigenMethod::automatic:
      break;
  }

  CMatrix vphi = V * phi;
  CVector lambda(N);
  for (Eigen::Index k = 0; k < N; ++k) lambda[k] = phi.col(k).dot(vphi.col(k));

  // Order by quasi-energy, then fix the basis inside exactly degenerate
  // eigenspaces by diagonalising the momentum label there.
  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> omega(N);
  for (Eigen::Index k = 0; k < N; ++k) omega[k] = fold_angle(-std::arg(lambda[k]));
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return omega[a] < omega[b]; });

  CMatrix phi_sorted(N, N), vphi_sorted(N, N);
  for (Eigen::Index k = 0; k < N; ++k) {
    phi_sorted.col(k) = phi.col(order[k]);
    vphi_sorted.col(k) = vphi.col(order[k]);
  }
  phi.resize(0, 0);
  vphi.resize(0, 0);

  std::vector<Complex> lam_sorted(N);
  for (Eigen::Index k = 0; k < N; ++k) lam_sorted[k] = lambda[order[k]];

  // Cluster boundaries on the circle; a cluster straddling omega = 0 is
  // handled by rotating the start index.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // (start, size) on circular index
  {
    Eigen::Index first_break = -1;
    for (Eigen::Index k = 0; k < N; ++k) {
      const Eigen::Index next = (k + 1) % N;
      if (std::abs(lam_sorted[next] - lam_sorted[k]) >= kDegenerateGap) {
        first_break = next;
        break;
      }
    }
    if (first_break < 0) {
      clusters.emplace_back(0, N);
    } else {
      Eigen::Index start = first_break;
      Eigen::Index size = 1;
      for (Eigen::Index step = 1; step <= N; ++step) {
        const Eigen::Index k = (first_break + step) % N;
        const Eigen::Index prev = (k + N - 1) % N;
        if (step < N && std::abs(lam_sorted[k] - lam_sorted[prev]) < kDegenerateGap) {
          ++size;
        } else {
          clusters.emplace_back(start, size);
          start = k;
          size = 1;
        }
      }
    }
  }

  RVector labels(N);
  for (Eigen::Index i = 0; i < N; ++i) labels[i] = static_cast<double>(i + 1);
  for (const auto& [start, size] : clusters) {
    if (size < 2) continue;
    std::vector<Eigen::Index> cols(size);
    for (Eigen::Index j = 0; j < size; ++j) cols[j] = (start + j) % N;
    CMatrix basis(N, size), vbasis(N, size);
    for (Eigen::Index j = 0; j < size; ++j) {
      basis.col(j) = phi_sorted.col(cols[j]);
      vbasis.col(j) = vphi_sorted.col(cols[j]);
    }
    CMatrix momentum = basis.adjoint() * labels.asDiagonal() * basis;
    RVector w;
    lapack::hermitian_eigen(momentum, w);
    basis = basis * momentum;
    vbasis = vbasis * momentum;
    for (Eigen::Index j = 0; j < size; ++j) {
      phi_sorted.col(cols[j]) = basis.col(j);
      vphi_sorted.col(cols[j]) = vbasis.col(j);
      lam_sorted[cols[j]] = basis.col(j).dot(vbasis.col(j));
    }
  }

  EigenDecomposition out;
  out.quasi_energies.resize(N);
  out.residuals.resize(N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double w = fold_angle(-std::arg(lam_sorted[k]));
    out.quasi_energies[k] = w;
    const Complex e = std::polar(1.0, -w);
    out.residuals[k] = (vphi_sorted.col(k) - e * phi_sorted.col(k)).norm();
  }
  out.eigenvectors = std::move(phi_sorted);

  const double worst = out.max_residual();
  if (!(worst <= kResidualLimit)) {
    std::ostringstream msg;
    msg << "eigenpair residual " << worst << " exceeds " << kResidualLimit;
    throw ConvergenceError(msg.str());
  }
  return out;
}

CVector apply_v(const FloquetMatrix& v, const CVector& state, int steps) {
  if (state.size() != v.dim()) throw std::invalid_argument("apply_v: state length differs from N");
  if (steps < 0) throw std::invalid_argument("apply_v: negative step count");
  CVector cur = state;
  CVector next(state.size());
  for (int t = 0; t < steps; ++t) {
    next.noalias() = v.entries * cur;
    cur.swap(next);
  }
  return cur;
}

double reconstruction_error(const FloquetMatrix& v, const EigenDecomposition& eig) {
  CVector lambda(eig.dim());
  for (int k = 0; k < eig.dim(); ++k) lambda[k] = eig.eigenvalue(k);
  const CMatrix rebuilt = eig.eigenvectors * lambda.asDiagonal() * eig.eigenvectors.adjoint();
  return (v.entries - rebuilt).cwiseAbs().maxCoeff();
}

}  // namespace qkr
