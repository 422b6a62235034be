#include "qkr/propagator.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <vector>

namespace qkr {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SplitStepPropagator::Impl {
  int n = 0;
  fftw_complex* buffer = nullptr;
  fftw_plan to_angle = nullptr;     // sum_s e^{+2 pi i j s / N}
  fftw_plan to_momentum = nullptr;  // sum_j e^{-2 pi i j s / N}
  std::vector<Complex> twist_in;    // e^{+i theta s / N}
  std::vector<Complex> kick;        // e^{-i z cos x_j} / N
  std::vector<Complex> twist_out;   // e^{-i theta s / N} e^{-i s^2 hbar / 2}

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (to_angle) fftw_destroy_plan(to_angle);
    if (to_momentum) fftw_destroy_plan(to_momentum);
    if (buffer) fftw_free(buffer);
  }
};

SplitStepPropagator::SplitStepPropagator(const ModelParams& params) : params_(params), impl_(std::make_unique<Impl>()) {
  params_.require_valid();
  const int n = params_.dim();
  auto& im = *impl_;
  im.n = n;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    im.buffer = fftw_alloc_complex(static_cast<std::size_t>(n));
    im.to_angle = fftw_plan_dft_1d(n, im.buffer, im.buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    im.to_momentum = fftw_plan_dft_1d(n, im.buffer, im.buffer, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  const double z = params_.kick_argument();
  const double theta = params_.theta;
  im.twist_in.resize(n);
  im.kick.resize(n);
  im.twist_out.resize(n);
  const long long two_n = 2LL * n;
  for (int i = 0; i < n; ++i) {
    const long long s = i + 1;
    im.twist_in[i] = std::polar(1.0, theta * static_cast<double>(s) / n);
    const double xj = (kTwoPi * i + theta) / n;
    im.kick[i] = std::polar(1.0 / n, -z * std::cos(xj));
    const long long r = (s * s % two_n) * params_.M % two_n;
    im.twist_out[i] = std::polar(1.0, -theta * static_cast<double>(s) / n - kPi * static_cast<double>(r) / n);
  }
}

SplitStepPropagator::~SplitStepPropagator() = default;
SplitStepPropagator::SplitStepPropagator(SplitStepPropagator&&) noexcept = default;
SplitStepPropagator& SplitStepPropagator::operator=(SplitStepPropagator&&) noexcept = default;

void SplitStepPropagator::step(std::span<Complex> state) const {
  auto& im = *impl_;
  if (static_cast<int>(state.size()) != im.n) throw std::invalid_argument("SplitStepPropagator: wrong state length");
  auto* buf = reinterpret_cast<Complex*>(im.buffer);
  for (int i = 0; i < im.n; ++i) buf[i] = state[i] * im.twist_in[i];
  fftw_execute(im.to_angle);
  for (int i = 0; i < im.n; ++i) buf[i] *= im.kick[i];
  fftw_execute(im.to_momentum);
  for (int i = 0; i < im.n; ++i) state[i] = buf[i] * im.twist_out[i];
}

CVector SplitStepPropagator::apply(const CVector& state, int steps) const {
  if (steps < 0) throw std::invalid_argument("SplitStepPropagator: negative step count");
  CVector out = state;
  for (int t = 0; t < steps; ++t) step({out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

CMatrix SplitStepPropagator::dense() const {
  const int n = impl_->n;
  CMatrix out = CMatrix::Identity(n, n);
  for (int j = 0; j < n; ++j) step({out.col(j).data(), static_cast<std::size_t>(n)});
  return out;
}

}  // namespace qkr
