#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sburg/errors.hpp"
#include "sburg/heun.hpp"
#include "sburg/rng.hpp"
#include "sburg/stats.hpp"

using namespace sburg;

namespace {

// Explicit trapezoid ODE step, written independently of heun_step.
double trapezoid_ode_step(double x, double (*f)(double), double dt) {
  const double k1 = f(x);
  const double k2 = f(x + k1 * dt);
  return x + 0.5 * dt * (k1 + k2);
}

double decay(double x) { return -x; }
double logistic(double x) { return x * (1.0 - x); }

}  // namespace

TEST_CASE("heun: deterministic linear example 0.905") {
  SdeState s;
  s.x = {1.0};
  auto f = [](const SdeState& st) { return std::vector<double>{-st.x[0]}; };
  auto g = [](const SdeState&) { return std::vector<double>{0.0}; };
  const SdeState out = heun_step(s, f, g, 0.0, 0.1);
  CHECK(out.x[0] == doctest::Approx(0.905).epsilon(1e-15));
  CHECK(out.time == doctest::Approx(0.1));
}

TEST_CASE("heun: g=0 reproduces the explicit trapezoid scheme bit-for-bit") {
  auto g = [](const SdeState&) { return std::vector<double>{0.0}; };
  for (double (*fn)(double) : {&decay, &logistic}) {
    auto f = [fn](const SdeState& st) { return std::vector<double>{fn(st.x[0])}; };
    double x_ref = 0.37;
    SdeState s;
    s.x = {0.37};
    for (int i = 0; i < 100; ++i) {
      x_ref = trapezoid_ode_step(x_ref, fn, 0.05);
      s = heun_step(s, f, g, 0.0, 0.05);
      REQUIRE(s.x[0] == x_ref);
    }
  }
}

TEST_CASE("heun: pure additive noise is exact") {
  SdeState s;
  s.x = {2.5};
  auto f = [](const SdeState&) { return std::vector<double>{0.0}; };
  auto g = [](const SdeState&) { return std::vector<double>{1.0}; };
  Rng rng(5, 0);
  double expect = 2.5;
  for (int i = 0; i < 50; ++i) {
    const double dw = 0.3 * rng.normal();
    expect += dw;
    s = heun_step(s, f, g, dw, 0.2);
    REQUIRE(s.x[0] == expect);
  }
}

TEST_CASE("heun: strong order ~1 on the linear Stratonovich test equation") {
  // dX = mu X dt + sig X o dW has the exact solution X0 exp(mu t + sig W).
  const double mu = -0.8, sig = 0.6, T = 1.0, x0 = 1.0;
  const int n_paths = 400;
  const int finest_pow = 8;
  const long n_fine = 1l << finest_pow;
  const double dt_fine = T / static_cast<double>(n_fine);

  auto f = [&](const SdeState& st) { return std::vector<double>{mu * st.x[0]}; };
  auto g = [&](const SdeState& st) { return std::vector<double>{sig * st.x[0]}; };

  std::vector<double> log_dt, log_err;
  for (int lev = 4; lev <= finest_pow; ++lev) {
    const long n = 1l << lev;
    const long group = n_fine / n;
    const double dt = T / static_cast<double>(n);
    double err_sum = 0.0;
    for (int path = 0; path < n_paths; ++path) {
      const WienerIncrements fine =
          generate_increments(900 + path, dt_fine, n_fine);
      double w_total = 0.0;
      SdeState s;
      s.x = {x0};
      for (long k = 0; k < n; ++k) {
        double dw = 0.0;
        for (long j = 0; j < group; ++j) dw += fine.increments[k * group + j];
        w_total += dw;
        s = heun_step(s, f, g, dw, dt);
      }
      const double exact = x0 * std::exp(mu * T + sig * w_total);
      err_sum += std::abs(s.x[0] - exact);
    }
    log_dt.push_back(std::log(dt));
    log_err.push_back(std::log(err_sum / n_paths));
  }
  const double slope = fit_slope(log_dt, log_err);
  CHECK(slope > 0.8);
  CHECK(slope < 1.2);
}

TEST_CASE("heun: blow-up guard carries the trajectory time") {
  SdeState s;
  s.x = {1.0};
  s.time = 3.0;
  auto f = [](const SdeState&) { return std::vector<double>{1e12}; };
  auto g = [](const SdeState&) { return std::vector<double>{0.0}; };
  try {
    heun_step(s, f, g, 0.0, 0.5);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.time() == doctest::Approx(3.5));
  }

  auto fnan = [](const SdeState&) {
    return std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
  };
  CHECK_THROWS_AS(heun_step(s, fnan, g, 0.0, 0.5), BlowupError);
}

TEST_CASE("heun: rejects non-positive dt") {
  SdeState s;
  s.x = {1.0};
  auto f = [](const SdeState&) { return std::vector<double>{0.0}; };
  CHECK_THROWS_AS(heun_step(s, f, f, 0.0, 0.0), std::invalid_argument);
}
