#pragma once

#include <stdexcept>
#include <vector>

#include "sburg/stats.hpp"

namespace sburg {

/// First-order realization of the exponential-memory operator of mode m:
/// convolution with exp(-(m^2-1) t), i.e. the state of
///   zdot = -(m^2 - 1) z + input.
struct ExpFilter {
  int m = 2;           // mode index, >= 2
  double rate = 3.0;   // m^2 - 1
  double z = 0.0;      // current filtered value; filters start quiescent
};

inline ExpFilter make_filter(int m) {
  if (m < 2) throw std::invalid_argument("make_filter: mode index must be >= 2");
  return ExpFilter{m, static_cast<double>(m) * m - 1.0, 0.0};
}

/// One Heun step of zdot = -rate z + input with the input held constant over
/// the step. White-noise drivers enter as dW/dt.
inline ExpFilter filter_step(const ExpFilter& f, double input, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("filter_step: dt must be > 0");
  const double d0 = -f.rate * f.z + input;
  const double zp = f.z + d0 * dt;
  const double d1 = -f.rate * zp + input;
  return ExpFilter{f.m, f.rate, f.z + 0.5 * dt * (d0 + d1)};
}

/// Composition of filters: output of stage i drives stage i+1.
/// An empty chain is the identity.
struct FilterChain {
  std::vector<ExpFilter> stages;
};

/// Chain output for a given raw input: last stage's state, or the input
/// itself for the empty chain.
inline double chain_output(const FilterChain& chain, double input) {
  return chain.stages.empty() ? input : chain.stages.back().z;
}

/// Advance stages in order; stage i+1 is driven by the post-step output of
/// stage i.
inline FilterChain chain_step(const FilterChain& chain, double input, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("chain_step: dt must be > 0");
  FilterChain out = chain;
  double drive = input;
  for (ExpFilter& stage : out.stages) {
    stage = filter_step(stage, drive, dt);
    drive = stage.z;
  }
  return out;
}

/// Stationary covariance of (z1, z2) for the white-noise-driven cascade
///   z1dot = -beta1 z1 + phi,  z2dot = -beta2 z2 + z1,
/// obtained by inverting the quadratic form of the stationary Gaussian.
inline Sym2 stationary_z_covariance(double beta1, double beta2) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw std::invalid_argument("stationary_z_covariance: betas must be > 0");
  const double sum = beta1 + beta2;
  return Sym2{1.0 / (2.0 * beta1), 1.0 / (2.0 * beta1 * sum),
              1.0 / (2.0 * beta1 * beta2 * sum)};
}

/// The six filter states the amplitude models and the field reconstruction
/// consume, named by their chain acting on the mode-2 noise phi2:
///   e2     = E2 phi2          e2e2   = E2 E2 phi2
///   e3e2   = E3 E2 phi2       e2e3e2 = E2 E3 E2 phi2
///   e4e2   = E4 E2 phi2       e4e3e2 = E4 E3 E2 phi2
/// The cascade is autonomous and linear, driven by one scalar input.
struct FilterBank {
  double e2 = 0.0;
  double e2e2 = 0.0;
  double e3e2 = 0.0;
  double e2e3e2 = 0.0;
  double e4e2 = 0.0;
  double e4e3e2 = 0.0;
};

inline FilterBank bank_drift(const FilterBank& b, double input) {
  FilterBank d;
  d.e2 = -3.0 * b.e2 + input;
  d.e2e2 = -3.0 * b.e2e2 + b.e2;
  d.e3e2 = -8.0 * b.e3e2 + b.e2;
  d.e2e3e2 = -3.0 * b.e2e3e2 + b.e3e2;
  d.e4e2 = -15.0 * b.e4e2 + b.e2;
  d.e4e3e2 = -15.0 * b.e4e3e2 + b.e3e2;
  return d;
}

inline FilterBank bank_euler(const FilterBank& b, const FilterBank& d, double dt) {
  return FilterBank{b.e2 + d.e2 * dt,         b.e2e2 + d.e2e2 * dt,
                    b.e3e2 + d.e3e2 * dt,     b.e2e3e2 + d.e2e3e2 * dt,
                    b.e4e2 + d.e4e2 * dt,     b.e4e3e2 + d.e4e3e2 * dt};
}

inline FilterBank bank_trapezoid(const FilterBank& b, const FilterBank& d0,
                                 const FilterBank& d1, double dt) {
  const double h = 0.5 * dt;
  return FilterBank{b.e2 + h * (d0.e2 + d1.e2),
                    b.e2e2 + h * (d0.e2e2 + d1.e2e2),
                    b.e3e2 + h * (d0.e3e2 + d1.e3e2),
                    b.e2e3e2 + h * (d0.e2e3e2 + d1.e2e3e2),
                    b.e4e2 + h * (d0.e4e2 + d1.e4e2),
                    b.e4e3e2 + h * (d0.e4e3e2 + d1.e4e3e2)};
}

/// One coupled Heun step of the whole cascade; the strong-model steppers
/// advance their banks through this exact arithmetic.
inline FilterBank bank_step(const FilterBank& b, double input, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("bank_step: dt must be > 0");
  const FilterBank d0 = bank_drift(b, input);
  const FilterBank pred = bank_euler(b, d0, dt);
  const FilterBank d1 = bank_drift(pred, input);
  return bank_trapezoid(b, d0, d1, dt);
}

}  // namespace sburg
