#pragma once

#include <memory>
#include <span>

#include "qkr/model.hpp"
#include "qkr/types.hpp"

namespace qkr {

// One period of the resonant rotor applied in O(N log N): the kick is
// diagonal on the N-point angle grid x_j = (2 pi j + theta) / N and the free
// rotation is diagonal in momentum. Uses no Bessel functions, which makes it
// an independent route to the same V_theta that build_v assembles.
//
// An instance owns scratch buffers; share one per thread, not across threads.
class SplitStepPropagator {
 public:
  explicit SplitStepPropagator(const ModelParams& params);
  ~SplitStepPropagator();
  SplitStepPropagator(SplitStepPropagator&&) noexcept;
  SplitStepPropagator& operator=(SplitStepPropagator&&) noexcept;

  const ModelParams& params() const { return params_; }
  int dim() const { return params_.dim(); }

  // In-place single period.
  void step(std::span<Complex> state) const;
  CVector apply(const CVector& state, int steps) const;
  // Dense matrix obtained by propagating every basis vector (tests only).
  CMatrix dense() const;

 private:
  struct Impl;
  ModelParams params_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qkr
