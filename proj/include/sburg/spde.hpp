#pragma once

#include <cstdint>
#include <vector>

#include "sburg/grid.hpp"
#include "sburg/rng.hpp"

namespace sburg {

/// Parameters of the forced Burgers-type equation
///   u_t = -u u_x + u_xx + (1-gamma) u + sigma * sum_k phi_k(t) sin(k x),
///   u = 0 at x = 0, pi.
struct SpdeParams {
  double gamma = 0.0;
  double sigma = 0.0;
  std::vector<int> noise_modes = {2};  // forced wavenumbers, independent drivers
  double dt = 0.01;
  bool include_advection = true;  // false = linearized equation (testing)
};

void validate(const SpdeParams& params);

/// Full right-hand side at the interior nodes. Advection is the conservative
/// centered difference -((u^2/2)_{i+1} - (u^2/2)_{i-1}) / (2 dx); diffusion is
/// the centered second difference; ghost boundary values are zero.
/// noise_values supplies one phi_k per forced mode (white noise enters as
/// dW_k/dt).
std::vector<double> spde_rhs(const FieldState& field, const SpdeParams& params,
                             const Grid& grid,
                             const std::vector<double>& noise_values);

/// One Heun step; the forcing is additive so the noise is held constant over
/// the step via phi_k = dW_k/dt. Throws BlowupError past kBlowupLimit.
FieldState spde_step(const FieldState& field, const SpdeParams& params,
                     const Grid& grid, const std::vector<double>& increments);

/// Amplitude series (and optional field snapshots) of one realization.
struct SpdeSeries {
  std::vector<double> t;
  std::vector<double> a;
  std::vector<double> snapshot_t;
  std::vector<std::vector<double>> snapshots;
};

/// Run one seeded realization to horizon T, recording the sin x amplitude
/// every output_every time units (every step if output_every <= dt).
/// Noise mode k draws from stream (seed, make_stream(member, k)).
/// Deterministic given (seed, member); propagates BlowupError.
SpdeSeries run_spde(const SpdeParams& params, const Grid& grid,
                    const FieldState& initial, std::uint64_t seed, double T,
                    double output_every = 0.0, double snapshot_every = 0.0,
                    std::uint64_t member = 0);

/// Discrete energy integral(u^2) dx.
double field_energy(const FieldState& field, const Grid& grid);

}  // namespace sburg
