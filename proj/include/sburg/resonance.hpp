#pragma once

#include <cstdint>
#include <vector>

#include "sburg/ensemble.hpp"
#include "sburg/rng.hpp"
#include "sburg/stats.hpp"

namespace sburg {

/// The two quadratic-noise processes and their filtered drivers:
///   y1dot = z1 phi2, y2dot = z2 phi2,
///   z1dot = -beta1 z1 + phi2, z2dot = -beta2 z2 + z1.
struct QuadNoiseState {
  double y1 = 0.0;
  double y2 = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double beta1 = 3.0;
  double beta2 = 8.0;
  double time = 0.0;
};

/// One Heun step driven by a single shared dW (phi2 = dW/dt on the step).
/// The y products are evaluated through the Heun midpoint, which is what
/// produces the Stratonovich drift of y1.
QuadNoiseState quad_step(const QuadNoiseState& state, double dw, double dt);

/// Diffusion matrix of the slowly varying density of (y1, y2):
///   [[1/(4 b1), 1/(4 b1 (b1+b2))], [., 1/(4 b1 b2 (b1+b2))]]
Sym2 theoretical_diffusion(double beta1, double beta2);

/// Coefficients of the long-time replacement SDEs
///   y1dot = 1/2 + psi1/sqrt(2 b1),
///   y2dot = (psi1/sqrt(2 b1) + psi2/sqrt(2 b2)) / (b1+b2).
struct ReplacementCoefficients {
  double y1_drift;
  double y1_psi1;
  double y2_psi1;
  double y2_psi2;
};

ReplacementCoefficients replacement_coefficients(double beta1, double beta2);

struct ResonanceConfig {
  std::uint64_t master_seed = 2025;
  int ensemble = 10000;
  double horizon = 50.0;
  double dt = 0.005;
  double beta1 = 3.0;
  double beta2 = 8.0;
  double burn_in = -1.0;  // < 0 -> default 5/beta1
  EnsembleMode mode = kDefaultEnsembleMode;
};

/// Monte-Carlo long-time statistics of the quadratic noises.
struct DriftDiffusionEstimate {
  double drift_y1 = 0.0;
  double drift_y2 = 0.0;
  double drift_y1_stderr = 0.0;
  double drift_y2_stderr = 0.0;
  Sym2 diffusion;
  Sym2 diffusion_stderr;
  Sym2 z_covariance;  // sample covariance of (z1, z2) at the horizon
  int ensemble_size = 0;
  double horizon = 0.0;
  double dt = 0.0;
  double burn_in = 0.0;
  int blowups = 0;
  bool stderr_reliable = false;
};

/// Runs `ensemble` independent trajectories: burn the filters in for
/// burn_in time units, zero the y's, then integrate to the horizon.
/// drift = mean(y(T))/T, diffusion = cov(y(T))/(2T), stderr by batch means
/// over the member index. Blown-up members are counted and excluded.
DriftDiffusionEstimate estimate_long_time_stats(const ResonanceConfig& config);

/// Statistics of the realized quadratic-noise forcing q = (z1 - 3 z2) phi2
/// along a seeded path: its long-time mean rate (expected 1/2 - 3*0 times
/// the combination, i.e. 1/2 here for the y1 part alone), the variance rate
/// of the drift-corrected integral, and its correlation with phi2 over
/// coarse bins of several widths.
struct EffectiveNoiseReport {
  double mean_rate = 0.0;          // time-average of q (expected 1/2)
  double variance_rate = 0.0;      // Var[int q dt - t/2] / t
  double variance_rate_stderr = 0.0;
  double folded_variance = 0.0;    // variance_rate / 44^2, the Eq-scale value
  std::vector<double> bin_widths;
  std::vector<double> bin_correlation;
  std::vector<double> bin_correlation_stderr;
  double horizon = 0.0;
  int bins_used = 0;
};

/// phi2 must be a WienerIncrements path (its dt sets the step). Window
/// width defaults to 10/beta1 when window <= 0.
EffectiveNoiseReport synthesize_effective_noise(const WienerIncrements& phi2,
                                                double beta1 = 3.0,
                                                double beta2 = 8.0,
                                                double window = -1.0);

}  // namespace sburg
