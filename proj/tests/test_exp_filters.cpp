#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sburg/exp_filters.hpp"
#include "sburg/rng.hpp"

using namespace sburg;

TEST_CASE("filter rates are m^2 - 1") {
  CHECK(make_filter(2).rate == 3.0);
  CHECK(make_filter(3).rate == 8.0);
  CHECK(make_filter(4).rate == 15.0);
  CHECK_THROWS_AS(make_filter(1), std::invalid_argument);
}

TEST_CASE("filter: constant input converges to 1/(m^2-1)") {
  const double dt = 0.005;
  ExpFilter f2 = make_filter(2);
  ExpFilter f3 = make_filter(3);
  for (double t = 0.0; t < 12.0; t += dt) {
    f2 = filter_step(f2, 1.0, dt);
    f3 = filter_step(f3, 1.0, dt);
  }
  CHECK(f2.z == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(f3.z == doctest::Approx(1.0 / 8.0).epsilon(1e-6));
}

TEST_CASE("filter: impulse response decays like exp(-3t)") {
  const double dt = 0.005;
  // Unit-area impulse over the first step.
  ExpFilter f = filter_step(make_filter(2), 1.0 / dt, dt);
  double z_half = 0.0, z_one = 0.0, z_two = 0.0;
  double t = dt;
  while (t < 2.0 + dt / 2) {
    if (std::abs(t - 0.5) < dt / 2) z_half = f.z;
    if (std::abs(t - 1.0) < dt / 2) z_one = f.z;
    f = filter_step(f, 0.0, dt);
    t += dt;
  }
  z_two = f.z;
  CHECK(z_one / z_half == doctest::Approx(std::exp(-3.0 * 0.5)).epsilon(0.01));
  CHECK(z_two / z_one == doctest::Approx(std::exp(-3.0 * 1.0)).epsilon(0.01));
}

TEST_CASE("filter: zero input only decays") {
  ExpFilter f = make_filter(3);
  f.z = 1.7;
  for (int i = 0; i < 200; ++i) {
    const ExpFilter next = filter_step(f, 0.0, 0.01);
    CHECK(std::abs(next.z) <= std::abs(f.z));
    f = next;
  }
}

TEST_CASE("filter: trapezoid residual of zdot + k z = input vanishes") {
  // (z' - z)/dt + rate*(z + z')/2 - input = 0 exactly for the scheme.
  ExpFilter f = make_filter(2);
  Rng rng(77, 0);
  const double dt = 0.01;
  for (int i = 0; i < 500; ++i) {
    const double input = rng.normal();
    const ExpFilter next = filter_step(f, input, dt);
    const double residual =
        (next.z - f.z) / dt + f.rate * 0.5 * (next.z + f.z) - input;
    REQUIRE(std::abs(residual) < 1e-12);
    f = next;
  }
}

TEST_CASE("chain: empty chain is the identity") {
  FilterChain chain;
  CHECK(chain_output(chain, 0.42) == 0.42);
  const FilterChain stepped = chain_step(chain, 0.42, 0.1);
  CHECK(stepped.stages.empty());
}

TEST_CASE("chain: single-stage chain equals filter_step") {
  FilterChain chain;
  chain.stages = {make_filter(2)};
  ExpFilter lone = make_filter(2);
  Rng rng(3, 0);
  for (int i = 0; i < 200; ++i) {
    const double input = rng.normal();
    chain = chain_step(chain, input, 0.02);
    lone = filter_step(lone, input, 0.02);
    REQUIRE(chain.stages[0].z == lone.z);
  }
}

TEST_CASE("chain: (E2,E3) steady output is 1/24 under constant input") {
  FilterChain chain;
  chain.stages = {make_filter(2), make_filter(3)};
  const double dt = 0.005;
  for (double t = 0.0; t < 14.0; t += dt) chain = chain_step(chain, 1.0, dt);
  CHECK(chain_output(chain, 1.0) == doctest::Approx(1.0 / 24.0).epsilon(1e-5));
}

TEST_CASE("chain: composition order commutes within scheme tolerance") {
  FilterChain ab, ba;
  ab.stages = {make_filter(2), make_filter(3)};
  ba.stages = {make_filter(3), make_filter(2)};
  Rng rng(99, 0);
  const double dt = 0.002;
  double max_diff = 0.0, max_mag = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const double input = rng.normal() / std::sqrt(dt);  // white-noise-like
    ab = chain_step(ab, input, dt);
    ba = chain_step(ba, input, dt);
    max_diff = std::max(max_diff, std::abs(ab.stages[1].z - ba.stages[1].z));
    max_mag = std::max(max_mag, std::abs(ab.stages[1].z));
  }
  CHECK(max_diff < 0.05 * max_mag);
}

TEST_CASE("stationary_z_covariance closed form and PDF-inversion oracle") {
  const Sym2 c = stationary_z_covariance(3.0, 8.0);
  CHECK(c.m11 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(c.m12 == doctest::Approx(1.0 / 66.0).epsilon(1e-15));
  CHECK(c.m22 == doctest::Approx(1.0 / 528.0).epsilon(1e-15));
  CHECK_THROWS_AS(stationary_z_covariance(0.0, 8.0), std::invalid_argument);

  // Oracle: the inverse covariance read directly off the stationary-density
  // quadratic form exp[-(b1+b2) z1^2 + 2 b2 (b1+b2) z1 z2 - b2 (b1+b2)^2 z2^2]
  // must satisfy Sigma * Sigma^{-1} = I.
  for (auto [b1, b2] : {std::pair{3.0, 8.0}, {1.5, 2.0}, {0.7, 11.0}}) {
    const Sym2 s = stationary_z_covariance(b1, b2);
    const double q11 = 2.0 * (b1 + b2);
    const double q12 = -2.0 * b2 * (b1 + b2);
    const double q22 = 2.0 * b2 * (b1 + b2) * (b1 + b2);
    CHECK(s.m11 * q11 + s.m12 * q12 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.m11 * q12 + s.m12 * q22 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.m12 * q12 + s.m22 * q22 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.positive_definite());
  }
}

TEST_CASE("bank: matches sequential chains within scheme tolerance") {
  FilterBank bank;
  FilterChain c_e2, c_e2e2, c_e3e2;
  c_e2.stages = {make_filter(2)};
  c_e2e2.stages = {make_filter(2), make_filter(2)};
  c_e3e2.stages = {make_filter(2), make_filter(3)};
  Rng rng(13, 0);
  const double dt = 0.002;
  for (int i = 0; i < 4000; ++i) {
    const double input = rng.normal() / std::sqrt(dt);
    bank = bank_step(bank, input, dt);
    c_e2 = chain_step(c_e2, input, dt);
    c_e2e2 = chain_step(c_e2e2, input, dt);
    c_e3e2 = chain_step(c_e3e2, input, dt);
  }
  CHECK(bank.e2 == doctest::Approx(c_e2.stages.back().z).epsilon(1e-10));
  CHECK(bank.e2e2 == doctest::Approx(c_e2e2.stages.back().z).epsilon(0.02));
  CHECK(bank.e3e2 == doctest::Approx(c_e3e2.stages.back().z).epsilon(0.02));
}

TEST_CASE("bank: white-noise ensemble covariance matches the closed form") {
  // (e2, e3e2) is exactly the (z1, z2) cascade with beta1=3, beta2=8.
  const int n = 4000;
  const double dt = 0.005, T = 20.0;
  std::vector<double> z1(n), z2(n);
  for (int k = 0; k < n; ++k) {
    Rng rng(123, make_stream(k, 2));
    FilterBank b;
    const double root_dt = std::sqrt(dt);
    for (double t = 0.0; t < T; t += dt)
      b = bank_step(b, root_dt * rng.normal() / dt, dt);
    z1[k] = b.e2;
    z2[k] = b.e3e2;
  }
  const Sym2 sample = sample_covariance2(z1, z2);
  const Sym2 expect = stationary_z_covariance(3.0, 8.0);
  CHECK(sample.m11 == doctest::Approx(expect.m11).epsilon(0.10));
  CHECK(sample.m12 == doctest::Approx(expect.m12).epsilon(0.10));
  CHECK(sample.m22 == doctest::Approx(expect.m22).epsilon(0.10));
}
