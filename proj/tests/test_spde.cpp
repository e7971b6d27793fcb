#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sburg/errors.hpp"
#include "sburg/spde.hpp"
#include "sburg/stats.hpp"

using namespace sburg;

namespace {

SpdeParams quiet(double gamma, double dt) {
  SpdeParams p;
  p.gamma = gamma;
  p.sigma = 0.0;
  p.dt = dt;
  return p;
}

// Deterministic equilibrium amplitude of the discrete system.
double equilibrium_amplitude(int n, double gamma, double a0, double T) {
  const Grid grid(n);
  SpdeParams p = quiet(gamma, grid.dx * grid.dx / 8.0);
  const SpdeSeries s =
      run_spde(p, grid, make_mode_field(grid, 1, a0), 1, T, 1.0);
  return s.a.back();
}

}  // namespace

TEST_CASE("grid: dx * (n+1) = pi to machine precision") {
  for (int n : {7, 15, 31, 127}) {
    const Grid g(n);
    CHECK(g.dx * (n + 1) == doctest::Approx(M_PI).epsilon(1e-15));
  }
  CHECK_THROWS_AS(Grid(0), std::invalid_argument);
}

TEST_CASE("params validation") {
  SpdeParams p;
  p.sigma = -1.0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.sigma = 1.0;
  p.noise_modes = {};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("rhs: u = 0 with sigma = 0 gives exactly zero") {
  const Grid grid(15);
  FieldState f;
  f.u.assign(15, 0.0);
  for (double v : spde_rhs(f, quiet(0.3, 0.01), grid, {})) CHECK(v == 0.0);
}

TEST_CASE("rhs: sin x is linearly neutral at gamma = 0") {
  const Grid grid(15);
  const double eps = 1e-6;
  const FieldState f = make_mode_field(grid, 1, eps);
  const std::vector<double> r = spde_rhs(f, quiet(0.0, 0.01), grid, {});
  // The discrete eigenvalue of d_xx + 1 on sin x is dx^2/12 + O(dx^4);
  // advection contributes O(eps^2).
  const double bound = eps * grid.dx * grid.dx / 12.0 * 1.5 + 1e-12;
  for (double v : r) CHECK(std::abs(v) <= bound);
  CHECK(bound < 1e-8);  // the headline claim at this resolution
}

TEST_CASE("rhs: linear part of sin 2x has eigenvalue -(k^2-1) + O(dx^2)") {
  const Grid grid(15);
  const double eps = 1e-6;
  const FieldState f = make_mode_field(grid, 2, eps);
  const std::vector<double> r = spde_rhs(f, quiet(0.0, 0.01), grid, {});
  // Discrete eigenvalue, exactly representable on the mode.
  const double dx = grid.dx;
  const double mu = 1.0 - (2.0 - 2.0 * std::cos(2.0 * dx)) / (dx * dx);
  for (int i = 0; i < grid.n_interior; ++i)
    CHECK(r[i] ==
          doctest::Approx(mu * eps * std::sin(2.0 * grid.x(i))).epsilon(1e-6));
  CHECK(std::abs(mu + 3.0) <= 16.0 / 12.0 * dx * dx * 1.2);
}

TEST_CASE("projection: discrete sine orthogonality is exact") {
  const Grid grid(31);
  CHECK(project_amplitude(make_mode_field(grid, 1, 1.0), grid) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(std::abs(project_amplitude(make_mode_field(grid, 2, 1.0), grid)) < 1e-13);

  FieldState mix = make_mode_field(grid, 1, 0.3);
  const FieldState s2 = make_mode_field(grid, 2, -0.015);
  for (int i = 0; i < grid.n_interior; ++i) mix.u[i] += s2.u[i];
  CHECK(project_amplitude(mix, grid) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("deterministic growth: gamma=-0.03 rises monotonically toward the attractor") {
  const Grid grid(31);
  SpdeParams p = quiet(-0.03, 0.0025);
  const SpdeSeries s =
      run_spde(p, grid, make_mode_field(grid, 1, 0.2), 1, 60.0, 0.5);
  for (std::size_t i = 1; i < s.a.size(); ++i) CHECK(s.a[i] >= s.a[i - 1] - 1e-12);
  CHECK(s.a.back() > 0.55);
  CHECK(s.a.back() < 0.63);
}

TEST_CASE("deterministic decay: gamma=0.05 kills a small sin x mode") {
  const Grid grid(15);
  SpdeParams p = quiet(0.05, 0.005);
  const SpdeSeries s =
      run_spde(p, grid, make_mode_field(grid, 1, 0.1), 1, 40.0, 1.0);
  CHECK(s.a.back() < 0.02);
  CHECK(s.a.back() >= 0.0);
}

TEST_CASE("trivial solution is invariant") {
  const Grid grid(15);
  SpdeParams p = quiet(0.0, 0.01);
  FieldState zero;
  zero.u.assign(grid.n_interior, 0.0);
  const SpdeSeries s = run_spde(p, grid, zero, 9, 2.0, 0.1);
  for (double a : s.a) CHECK(a == 0.0);
}

TEST_CASE("sin 2x forcing never excites sin x from rest") {
  const Grid grid(7);
  SpdeParams p;
  p.gamma = -0.03;
  p.sigma = 1.0;
  p.noise_modes = {2};
  p.dt = 0.01;
  FieldState zero;
  zero.u.assign(grid.n_interior, 0.0);

  // Linearized equation: modes evolve independently.
  p.include_advection = false;
  SpdeSeries s = run_spde(p, grid, zero, 4, 5.0, 0.5);
  for (double a : s.a) CHECK(std::abs(a) < 1e-12);

  // Full equation: the even-mode subspace is invariant under the
  // conservative discretization as well.
  p.include_advection = true;
  s = run_spde(p, grid, zero, 4, 5.0, 0.5);
  for (double a : s.a) CHECK(std::abs(a) < 1e-12);
}

TEST_CASE("energy decays when gamma >= 1 and sigma = 0") {
  const Grid grid(15);
  SpdeParams p = quiet(1.0, 0.002);
  FieldState f = make_mode_field(grid, 1, 0.8);
  const FieldState s2 = make_mode_field(grid, 2, 0.3);
  for (int i = 0; i < grid.n_interior; ++i) f.u[i] += s2.u[i];
  double energy = field_energy(f, grid);
  for (int step = 0; step < 500; ++step) {
    f = spde_step(f, p, grid, {});
    const double next = field_energy(f, grid);
    CHECK(next <= energy * (1.0 + 1e-12));
    energy = next;
  }
}

TEST_CASE("spatial convergence: equilibrium error shrinks at second order") {
  const double ref = equilibrium_amplitude(127, -0.03, 0.2, 200.0);
  std::vector<double> log_dx, log_err;
  for (int n : {7, 15, 31}) {
    const double a = equilibrium_amplitude(n, -0.03, 0.2, 200.0);
    log_dx.push_back(std::log(M_PI / (n + 1)));
    log_err.push_back(std::log(std::abs(a - ref)));
  }
  const double slope = fit_slope(log_dx, log_err);
  CHECK(slope > 1.6);
  CHECK(slope < 2.4);
}

TEST_CASE("fig-1 configuration runs to completion with seven modes") {
  const Grid grid(15);
  SpdeParams p;
  p.gamma = 0.0;
  p.sigma = 1.0;
  p.noise_modes = {1, 2, 3, 4, 5, 6, 7};
  p.dt = 0.01;
  const SpdeSeries s =
      run_spde(p, grid, make_mode_field(grid, 1, 0.5), 11, 3.0, 0.0, 0.05);
  CHECK(s.t.size() == 301);
  CHECK(s.a.size() == 301);
  CHECK(s.snapshots.size() == 61);
  for (double a : s.a) CHECK(std::isfinite(a));
}

TEST_CASE("fig-4 style ensemble: strong noise damps the sin x mode") {
  const Grid grid(7);
  SpdeParams p;
  p.gamma = -0.03;
  p.sigma = 2.0;
  p.noise_modes = {2};
  p.dt = 0.05;
  std::vector<double> a5, a30;
  for (int member = 0; member < 8; ++member) {
    const SpdeSeries s = run_spde(p, grid, make_mode_field(grid, 1, 0.5), 21,
                                  30.0, 0.0, 0.0, member);
    a5.push_back(std::abs(s.a[std::lround(5.0 / 0.05)]));
    a30.push_back(std::abs(s.a.back()));
  }
  CHECK(median(a30) < median(a5));
}

TEST_CASE("fig-3 style ensemble: weak noise leaves the stabilised mode up") {
  const Grid grid(7);
  SpdeParams p;
  p.gamma = -0.03;
  p.sigma = 0.5;
  p.noise_modes = {2};
  p.dt = 0.05;
  std::vector<double> window_abs;
  for (int member = 0; member < 8; ++member) {
    const SpdeSeries s = run_spde(p, grid, make_mode_field(grid, 1, 0.5), 21,
                                  30.0, 0.0, 0.0, member);
    for (std::size_t i = 0; i < s.t.size(); ++i)
      if (s.t[i] >= 20.0) window_abs.push_back(std::abs(s.a[i]));
  }
  CHECK(median(window_abs) > 0.3);
}

TEST_CASE("determinism: same seed and member reproduce the series") {
  const Grid grid(7);
  SpdeParams p;
  p.gamma = -0.03;
  p.sigma = 0.5;
  p.noise_modes = {2};
  p.dt = 0.05;
  const FieldState u0 = make_mode_field(grid, 1, 0.5);
  const SpdeSeries s1 = run_spde(p, grid, u0, 33, 10.0, 0.0, 0.0, 5);
  const SpdeSeries s2 = run_spde(p, grid, u0, 33, 10.0, 0.0, 0.0, 5);
  CHECK(s1.a == s2.a);
  const SpdeSeries s3 = run_spde(p, grid, u0, 33, 10.0, 0.0, 0.0, 6);
  CHECK(s1.a != s3.a);
}

TEST_CASE("blow-up propagates with the offending time") {
  const Grid grid(15);
  SpdeParams p = quiet(-5.0, 1.0);  // dt far beyond the diffusion limit
  try {
    run_spde(p, grid, make_mode_field(grid, 1, 1.0), 1, 20.0);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= 20.0);
  }
}
