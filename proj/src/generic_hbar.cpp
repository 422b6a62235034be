#include "qkr/generic_hbar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "qkr/bessel.hpp"
#include "lapack.hpp"

namespace qkr {

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

struct Fraction {
  long long p = 0;
  long long q = 1;
};

bool resonant(long long M, long long Np, int Nx) {
  const long long N = Np * Nx;
  return N % 2 == 0 && std::gcd(M, N) == 1;
}

}  // namespace

RationalApprox rational_sequence(int Nx, double delta, int count, int max_dim) {
  if (Nx <= 0 || Nx % 2 != 0) throw ConfigError("rational_sequence: Nx must be even and positive");
  if (!(delta >= -1.0 && delta < 1.0)) throw ConfigError("rational_sequence: delta must lie in [-1, 1)");
  if (count < 1) throw ConfigError("rational_sequence: count must be at least 1");

  const Big two_pi = boost::math::constants::two_pi<Big>();
  const Big base = Big(Nx) + Big(delta);
  const Big target = Big(Nx) / (base * base);  // M / Np

  RationalApprox out;
  out.Nx = Nx;
  out.delta = delta;
  out.hbar_target = static_cast<double>(two_pi / (base * base));

  Big best = -1;  // |target - M/Np| of the last emitted term
  auto error_of = [&](long long p, long long q) { return abs(target - Big(p) / Big(q)); };
  auto emit = [&](long long p, long long q, bool convergent) {
    if (static_cast<long long>(Nx) * q > max_dim) return false;
    const Big err = error_of(p, q);
    if (best >= 0 && !(err < best)) return true;
    best = err;
    RationalTerm t;
    t.M = static_cast<int>(p);
    t.Np = static_cast<int>(q);
    t.hbar = static_cast<double>(two_pi * Big(p) / Big(static_cast<long long>(Nx) * q));
    t.delta_hbar = static_cast<double>(two_pi * err / Big(Nx));
    t.convergent = convergent;
    out.terms.push_back(t);
    return true;
  };
  auto describe = [](long long p, long long q) {
    std::ostringstream s;
    s << p << "/" << q;
    return s.str();
  };

  // Partial quotients, enough for any realistic max_dim.
  std::vector<long long> quotients;
  Big x = target;
  for (int k = 0; k < 64; ++k) {
    Big a = floor(x);
    Big frac = x - a;
    if (1 - frac < Big("1e-35")) {  // x is an integer up to rounding
      a += 1;
      frac = 0;
    }
    quotients.push_back(static_cast<long long>(a));
    if (frac < Big("1e-35")) break;
    x = 1 / frac;
    if (x > Big(1e15)) break;
  }

  // h_{k-2}, h_{k-1} recursion; a level k fraction is (h_{k-2} + t h_{k-1}) / (k_{k-2} + t k_{k-1}).
  std::vector<Fraction> conv;
  Fraction prev2{0, 1}, prev1{1, 0};
  for (long long a : quotients) {
    const Fraction c{a * prev1.p + prev2.p, a * prev1.q + prev2.q};
    conv.push_back(c);
    prev2 = prev1;
    prev1 = c;
  }

  auto level_pair = [&](std::size_t k) {
    const Fraction h2 = k >= 2 ? conv[k - 2] : (k == 1 ? Fraction{1, 0} : Fraction{0, 1});
    const Fraction h1 = k >= 1 ? conv[k - 1] : Fraction{1, 0};
    return std::pair{h2, h1};
  };

  bool stop = false;
  for (std::size_t k = 0; k < conv.size() && !stop && static_cast<int>(out.terms.size()) < count; ++k) {
    const Fraction c = conv[k];
    if (c.p == 0) continue;  // 0/1 is not a physical hbar
    if (static_cast<long long>(Nx) * c.q > max_dim) break;
    if (resonant(c.p, c.q, Nx)) {
      stop = !emit(c.p, c.q, true);
      continue;
    }
    std::ostringstream note;
    note << "convergent " << describe(c.p, c.q) << " skipped: gcd(M, N) != 1 with N = " << Nx * c.q;
    std::vector<std::string> used;
    for (std::size_t level = k; level <= k + 1 && level < conv.size(); ++level) {
      const auto [h2, h1] = level_pair(level);
      for (long long t = 1; t < quotients[level]; ++t) {
        const long long p = h2.p + t * h1.p;
        const long long q = h2.q + t * h1.q;
        if (p == 0 || !resonant(p, q, Nx)) continue;
        if (static_cast<long long>(Nx) * q > max_dim) break;
        const std::size_t before = out.terms.size();
        emit(p, q, false);
        if (out.terms.size() > before) used.push_back(describe(p, q));
        if (static_cast<int>(out.terms.size()) >= count) break;
      }
    }
    if (used.empty()) {
      note << "; no improving intermediate fraction";
    } else {
      note << "; substituted";
      for (const auto& u : used) note << " " << u;
    }
    out.notes.push_back(note.str());
  }
  if (out.terms.empty()) throw NoValidConvergent("rational_sequence: no valid approximant within the dimension cap");
  return out;
}

std::vector<AreaSpectrum> resonant_scan(const RationalApprox& approx, double K, EigenMethod method) {
  std::vector<AreaSpectrum> out;
  for (const auto& t : approx.terms) {
    ModelParams params{K, t.M, approx.Nx, t.Np, 0.0};
    const FloquetMatrix v = build_v(params);
    const EigenDecomposition eig = diagonalize(v, method);
    out.push_back(area_spectrum(eig, build_basis(params.Nx, params.Np), params.hbar()));
  }
  return out;
}

double localization_length(double diffusion, double hbar) {
  if (diffusion < 0.0 || !(hbar > 0.0)) throw std::invalid_argument("localization_length: need D >= 0 and hbar > 0");
  return diffusion / (2.0 * hbar * hbar);
}

CMatrix truncated_u(double K, double hbar, int n_cut) {
  if (n_cut < 1 || !(hbar > 0.0)) throw ConfigError("truncated_u: need n_cut >= 1 and hbar > 0");
  const double z = K / hbar;
  const int order = K == 0.0 ? 0 : std::min(bessel_truncation_order(z), n_cut - 1);
  const std::vector<double> j = bessel_j_table(order, z);
  std::vector<Complex> kick(2 * static_cast<std::size_t>(order) + 1);
  const Complex minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  for (int d = -order; d <= order; ++d) {
    const double jd = d < 0 && (-d) % 2 ? -j[-d] : j[std::abs(d)];
    kick[d + order] = minus_i_pow[((d % 4) + 4) % 4] * jd;
  }
  CMatrix u = CMatrix::Zero(n_cut, n_cut);
  for (int col = 0; col < n_cut; ++col) {
    const int lo = std::max(0, col - order), hi = std::min(n_cut - 1, col + order);
    for (int row = lo; row <= hi; ++row) {
      const double n = row + 1.0;
      const double phase = std::fmod(n * n * hbar / 2.0, kTwoPi);
      u(row, col) = std::polar(1.0, -phase) * kick[col - row + order];
    }
  }
  return u;
}

double normalized_area(std::span<const Complex> psi, const WannierBasis& basis) {
  const CVector amp = basis.amplitudes(psi);
  const RVector p = amp.cwiseAbs2();
  const double s = p.sum();
  if (s == 0.0) return 0.0;  // no weight inside the local window
  return s * s / p.squaredNorm();
}

double otsu_threshold(std::vector<double> values) {
  if (values.size() < 2) throw InsufficientData("otsu_threshold: need at least two values");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  double left = 0.0, best = -1.0, threshold = values.front();
  for (std::size_t i = 1; i < n; ++i) {
    left += values[i - 1];
    if (values[i] == values[i - 1]) continue;
    const double w0 = static_cast<double>(i) / n, w1 = 1.0 - w0;
    const double m0 = left / i, m1 = (total - left) / (n - i);
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      threshold = 0.5 * (values[i - 1] + values[i]);
    }
  }
  return threshold;
}

double TruncatedSpectrum::max_shift_change() const {
  double worst = 0.0;
  for (const auto& s : selected) worst = std::max(worst, std::abs(s.shifted_area - s.area) / s.area);
  return worst;
}

namespace {
double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}
}  // namespace

TruncatedSpectrum truncated_spectrum(const TruncatedParams& params) {
  const int local_Np = params.local_Np > 0 ? params.local_Np : 3 * params.Nx;
  const long long local_dim = static_cast<long long>(params.Nx) * local_Np;
  if (params.Nx <= 0) throw ConfigError("truncated_spectrum: Nx must be positive");
  if (!(params.delta >= -1.0 && params.delta < 1.0)) throw ConfigError("truncated_spectrum: delta must lie in [-1, 1)");
  const long long offset = params.window_center - local_dim / 2;
  if (offset < 0 || offset + local_dim + 1 > params.n_cut)
    throw ConfigError("truncated_spectrum: local Wannier window does not fit inside [1, n_cut]");

  TruncatedSpectrum out;
  out.params = params;
  out.params.local_Np = local_Np;
  out.hbar = kTwoPi / ((params.Nx + params.delta) * (params.Nx + params.delta));
  out.offset = offset;
  out.window_lo = params.n_cut / 3 + 1;
  out.window_hi = 2 * params.n_cut / 3;
  const double z = params.K / out.hbar;
  out.edge = params.K == 0.0 ? 0 : bessel_truncation_order(z);

  CMatrix u = truncated_u(params.K, out.hbar, params.n_cut);
  CVector w;
  CMatrix vr;
  lapack::general_eigen(u, w, vr);

  const int n = params.n_cut;
  const WannierBasis basis(params.Nx, local_Np, offset);
  const WannierBasis shifted(params.Nx, local_Np, offset + 1);
  std::vector<int> keep;
  for (int k = 0; k < n; ++k) {
    const RVector prob = vr.col(k).cwiseAbs2();
    const double norm = prob.sum();
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += (i + 1.0) * prob[i];
    mean /= norm;
    if (mean < out.window_lo || mean > out.window_hi) continue;
    ++out.candidates;
    const int lo = std::min(out.edge, n), len = std::max(0, n - 2 * out.edge);
    const double inside = prob.segment(lo, len).sum() / norm;
    if (inside <= params.min_inside) continue;
    TruncatedState s;
    s.index = k;
    s.eigenvalue = w[k];
    s.mean_n = mean;
    s.inside_weight = inside;
    const std::span<const Complex> psi(vr.col(k).data(), static_cast<std::size_t>(n));
    s.area = normalized_area(psi, basis);
    s.shifted_area = normalized_area(psi, shifted);
    out.selected.push_back(s);
    keep.push_back(k);
  }
  if (static_cast<int>(out.selected.size()) < params.min_selected) {
    std::ostringstream msg;
    msg << "truncated_spectrum: only " << out.selected.size() << " of " << out.candidates
        << " central eigenstates pass the leakage guard (need " << params.min_selected << ")";
    throw TruncationError(msg.str());
  }

  out.states.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.states.col(static_cast<Eigen::Index>(i)) = vr.col(keep[i]);

  std::vector<double> logs;
  for (const auto& s : out.selected) logs.push_back(std::log(s.area));
  out.class_threshold = out.selected.size() >= 2 ? otsu_threshold(logs) : logs.front();
  std::vector<double> small, large;
  for (auto& s : out.selected) {
    s.cls = std::log(s.area) > out.class_threshold ? 1 : 0;
    (s.cls ? large : small).push_back(s.area);
  }
  out.median_small = median(small);
  out.median_large = median(large);
  return out;
}

}  // namespace qkr
