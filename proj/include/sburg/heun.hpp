#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "sburg/errors.hpp"

namespace sburg {

/// Generic dense state for the Heun stepping contract. Dedicated simulators
/// (SPDE, amplitude models, quadratic-noise system) use their own fixed
/// layouts but follow the same predictor-corrector pattern.
struct SdeState {
  std::vector<double> x;
  double time = 0.0;
};

inline bool component_ok(double v) {
  return std::isfinite(v) && std::abs(v) <= kBlowupLimit;
}

/// One Heun (explicit trapezoid) step of dx = f(x) dt + g(x) dW in the
/// Stratonovich reading: white noise is held constant over the step.
///   predictor  x~ = x + f(x) dt + g(x) dW
///   corrector  x' = x + (f(x)+f(x~)) dt/2 + (g(x)+g(x~)) dW/2
/// Throws BlowupError (carrying the post-step time) on non-finite or
/// oversized output.
template <class Drift, class Diffusion>
SdeState heun_step(const SdeState& state, Drift&& drift, Diffusion&& diffusion,
                   double dw, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("heun_step: dt must be > 0");
  const std::size_t n = state.x.size();
  const std::vector<double> f0 = drift(state);
  const std::vector<double> g0 = diffusion(state);

  SdeState pred;
  pred.x.resize(n);
  pred.time = state.time;
  for (std::size_t i = 0; i < n; ++i)
    pred.x[i] = state.x[i] + f0[i] * dt + g0[i] * dw;

  const std::vector<double> f1 = drift(pred);
  const std::vector<double> g1 = diffusion(pred);

  SdeState out;
  out.x.resize(n);
  out.time = state.time + dt;
  for (std::size_t i = 0; i < n; ++i) {
    out.x[i] = state.x[i] + 0.5 * dt * (f0[i] + f1[i]) + 0.5 * dw * (g0[i] + g1[i]);
    if (!component_ok(out.x[i])) throw BlowupError(out.time);
  }
  return out;
}

}  // namespace sburg
