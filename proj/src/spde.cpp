#include "sburg/spde.hpp"

#include <cmath>
#include <stdexcept>

#include "sburg/errors.hpp"

namespace sburg {

void validate(const SpdeParams& params) {
  if (params.sigma < 0.0) throw std::invalid_argument("SpdeParams: sigma must be >= 0");
  if (params.sigma > 0.0 && params.noise_modes.empty())
    throw std::invalid_argument("SpdeParams: noise_modes empty with sigma > 0");
  if (!(params.dt > 0.0)) throw std::invalid_argument("SpdeParams: dt must be > 0");
  for (int k : params.noise_modes)
    if (k < 1) throw std::invalid_argument("SpdeParams: noise mode must be >= 1");
}

std::vector<double> spde_rhs(const FieldState& field, const SpdeParams& params,
                             const Grid& grid,
                             const std::vector<double>& noise_values) {
  const int n = grid.n_interior;
  const double dx = grid.dx;
  const double inv_dx2 = 1.0 / (dx * dx);
  const double inv_2dx = 1.0 / (2.0 * dx);
  const std::vector<double>& u = field.u;

  std::vector<double> rhs(n);
  auto at = [&](int i) -> double {  // ghost values are the boundary zeros
    return (i < 0 || i >= n) ? 0.0 : u[i];
  };

  for (int i = 0; i < n; ++i) {
    const double um = at(i - 1), u0 = u[i], up = at(i + 1);
    double r = (up - 2.0 * u0 + um) * inv_dx2 + (1.0 - params.gamma) * u0;
    if (params.include_advection)
      r -= (0.5 * up * up - 0.5 * um * um) * inv_2dx;
    rhs[i] = r;
  }

  if (params.sigma > 0.0 && !noise_values.empty()) {
    for (std::size_t m = 0; m < params.noise_modes.size(); ++m) {
      const double amp = params.sigma * noise_values[m];
      if (amp == 0.0) continue;
      const int k = params.noise_modes[m];
      for (int i = 0; i < n; ++i) rhs[i] += amp * std::sin(k * grid.x(i));
    }
  }
  return rhs;
}

FieldState spde_step(const FieldState& field, const SpdeParams& params,
                     const Grid& grid, const std::vector<double>& increments) {
  const int n = grid.n_interior;
  const double dt = params.dt;

  std::vector<double> phi(increments.size());
  for (std::size_t m = 0; m < increments.size(); ++m) phi[m] = increments[m] / dt;

  const std::vector<double> r0 = spde_rhs(field, params, grid, phi);
  FieldState pred;
  pred.u.resize(n);
  pred.time = field.time;
  for (int i = 0; i < n; ++i) pred.u[i] = field.u[i] + r0[i] * dt;

  const std::vector<double> r1 = spde_rhs(pred, params, grid, phi);
  FieldState out;
  out.u.resize(n);
  out.time = field.time + dt;
  for (int i = 0; i < n; ++i) {
    out.u[i] = field.u[i] + 0.5 * dt * (r0[i] + r1[i]);
    if (!(std::isfinite(out.u[i]) && std::abs(out.u[i]) <= kBlowupLimit))
      throw BlowupError(out.time);
  }
  return out;
}

SpdeSeries run_spde(const SpdeParams& params, const Grid& grid,
                    const FieldState& initial, std::uint64_t seed, double T,
                    double output_every, double snapshot_every,
                    std::uint64_t member) {
  validate(params);
  if (!(T > 0.0)) throw std::invalid_argument("run_spde: horizon must be > 0");
  if (static_cast<int>(initial.u.size()) != grid.n_interior)
    throw std::invalid_argument("run_spde: initial field does not match grid");

  const double dt = params.dt;
  const long nsteps = std::lround(T / dt);
  const long out_stride =
      output_every <= dt ? 1 : std::lround(output_every / dt);
  const long snap_stride =
      snapshot_every <= 0.0 ? 0 : std::lround(snapshot_every / dt);

  std::vector<Rng> mode_rng;
  mode_rng.reserve(params.noise_modes.size());
  for (int k : params.noise_modes)
    mode_rng.emplace_back(seed, make_stream(member, static_cast<std::uint64_t>(k)));

  SpdeSeries series;
  series.t.push_back(initial.time);
  series.a.push_back(project_amplitude(initial, grid));
  if (snap_stride > 0) {
    series.snapshot_t.push_back(initial.time);
    series.snapshots.push_back(initial.u);
  }

  FieldState field = initial;
  const double root_dt = std::sqrt(dt);
  std::vector<double> dw(params.noise_modes.size(), 0.0);
  for (long step = 1; step <= nsteps; ++step) {
    if (params.sigma > 0.0)
      for (std::size_t m = 0; m < dw.size(); ++m)
        dw[m] = root_dt * mode_rng[m].normal();
    field = spde_step(field, params, grid, dw);
    if (step % out_stride == 0 || step == nsteps) {
      series.t.push_back(field.time);
      series.a.push_back(project_amplitude(field, grid));
    }
    if (snap_stride > 0 && (step % snap_stride == 0 || step == nsteps)) {
      series.snapshot_t.push_back(field.time);
      series.snapshots.push_back(field.u);
    }
  }
  return series;
}

double field_energy(const FieldState& field, const Grid& grid) {
  double s = 0.0;
  for (double v : field.u) s += v * v;
  return s * grid.dx;
}

}  // namespace sburg
