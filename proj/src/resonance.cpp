#include "sburg/resonance.hpp"

#include <cmath>
#include <stdexcept>

#include "sburg/errors.hpp"

namespace sburg {

namespace {

struct QuadDerivative {
  double y1, y2, z1, z2;
};

QuadDerivative quad_drift(const QuadNoiseState& s, double phi) {
  return {s.z1 * phi, s.z2 * phi, -s.beta1 * s.z1 + phi, -s.beta2 * s.z2 + s.z1};
}

}  // namespace

QuadNoiseState quad_step(const QuadNoiseState& s, double dw, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("quad_step: dt must be > 0");
  const double phi = dw / dt;
  const QuadDerivative d0 = quad_drift(s, phi);

  QuadNoiseState pred = s;
  pred.y1 += d0.y1 * dt;
  pred.y2 += d0.y2 * dt;
  pred.z1 += d0.z1 * dt;
  pred.z2 += d0.z2 * dt;
  const QuadDerivative d1 = quad_drift(pred, phi);

  QuadNoiseState out = s;
  out.y1 += 0.5 * dt * (d0.y1 + d1.y1);
  out.y2 += 0.5 * dt * (d0.y2 + d1.y2);
  out.z1 += 0.5 * dt * (d0.z1 + d1.z1);
  out.z2 += 0.5 * dt * (d0.z2 + d1.z2);
  out.time = s.time + dt;

  for (double v : {out.y1, out.y2, out.z1, out.z2})
    if (!(std::isfinite(v) && std::abs(v) <= kBlowupLimit))
      throw BlowupError(out.time);
  return out;
}

Sym2 theoretical_diffusion(double beta1, double beta2) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw std::invalid_argument("theoretical_diffusion: betas must be > 0");
  const double sum = beta1 + beta2;
  return Sym2{1.0 / (4.0 * beta1), 1.0 / (4.0 * beta1 * sum),
              1.0 / (4.0 * beta1 * beta2 * sum)};
}

ReplacementCoefficients replacement_coefficients(double beta1, double beta2) {
  if (!(beta1 > 0.0) || !(beta2 > 0.0))
    throw std::invalid_argument("replacement_coefficients: betas must be > 0");
  const double sum = beta1 + beta2;
  return ReplacementCoefficients{0.5, 1.0 / std::sqrt(2.0 * beta1),
                                 1.0 / (sum * std::sqrt(2.0 * beta1)),
                                 1.0 / (sum * std::sqrt(2.0 * beta2))};
}

namespace {

struct MemberResult {
  double y1 = 0.0, y2 = 0.0, z1 = 0.0, z2 = 0.0;
  bool blew_up = false;
};

MemberResult run_member(const ResonanceConfig& cfg, int member, double burn_in) {
  Rng rng(cfg.master_seed, make_stream(static_cast<std::uint64_t>(member), 2));
  QuadNoiseState s;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  const double dt = cfg.dt;
  const double root_dt = std::sqrt(dt);
  const long burn_steps = std::lround(burn_in / dt);
  const long run_steps = std::lround(cfg.horizon / dt);
  MemberResult r;
  try {
    for (long i = 0; i < burn_steps; ++i)
      s = quad_step(s, root_dt * rng.normal(), dt);
    s.y1 = 0.0;
    s.y2 = 0.0;
    for (long i = 0; i < run_steps; ++i)
      s = quad_step(s, root_dt * rng.normal(), dt);
    r.y1 = s.y1;
    r.y2 = s.y2;
    r.z1 = s.z1;
    r.z2 = s.z2;
  } catch (const BlowupError&) {
    r.blew_up = true;
  }
  return r;
}

// Spread of per-batch estimates around the pooled estimate, as a stderr.
double batch_stderr(const std::vector<double>& batch_values) {
  const std::size_t b = batch_values.size();
  if (b < 2) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(variance(batch_values) / static_cast<double>(b));
}

}  // namespace

DriftDiffusionEstimate estimate_long_time_stats(const ResonanceConfig& cfg) {
  if (cfg.ensemble < 1)
    throw std::invalid_argument("estimate_long_time_stats: ensemble must be >= 1");
  if (!(cfg.horizon > 0.0) || !(cfg.dt > 0.0))
    throw std::invalid_argument("estimate_long_time_stats: bad horizon or dt");
  const double burn_in = cfg.burn_in >= 0.0 ? cfg.burn_in : 5.0 / cfg.beta1;

  const std::vector<MemberResult> members = ensemble_map<MemberResult>(
      cfg.ensemble, [&](int k) { return run_member(cfg, k, burn_in); },
      cfg.mode);

  std::vector<double> y1, y2, z1, z2;
  y1.reserve(members.size());
  int blowups = 0;
  for (const MemberResult& m : members) {
    if (m.blew_up) {
      ++blowups;
      continue;
    }
    y1.push_back(m.y1);
    y2.push_back(m.y2);
    z1.push_back(m.z1);
    z2.push_back(m.z2);
  }
  if (y1.empty()) throw BlowupError(cfg.horizon);

  const double T = cfg.horizon;
  const std::size_t n = y1.size();

  DriftDiffusionEstimate est;
  est.ensemble_size = static_cast<int>(n);
  est.horizon = T;
  est.dt = cfg.dt;
  est.burn_in = burn_in;
  est.blowups = blowups;
  est.drift_y1 = mean(y1) / T;
  est.drift_y2 = mean(y2) / T;
  const Sym2 cov_y = sample_covariance2(y1, y2);
  est.diffusion = Sym2{cov_y.m11 / (2.0 * T), cov_y.m12 / (2.0 * T),
                       cov_y.m22 / (2.0 * T)};
  est.z_covariance = sample_covariance2(z1, z2);

  // Batch means over the (already independent) member index.
  const int nbatch = n >= 64 ? 32 : static_cast<int>(n / 2);
  est.stderr_reliable = nbatch >= 2;
  if (est.stderr_reliable) {
    std::vector<double> bd1, bd2, bm11, bm12, bm22;
    const std::size_t per = n / nbatch;
    for (int b = 0; b < nbatch; ++b) {
      const std::size_t lo = b * per;
      const std::size_t hi = (b == nbatch - 1) ? n : lo + per;
      std::span<const double> s1(y1.data() + lo, hi - lo);
      std::span<const double> s2(y2.data() + lo, hi - lo);
      bd1.push_back(mean(s1) / T);
      bd2.push_back(mean(s2) / T);
      const Sym2 c = sample_covariance2(s1, s2);
      bm11.push_back(c.m11 / (2.0 * T));
      bm12.push_back(c.m12 / (2.0 * T));
      bm22.push_back(c.m22 / (2.0 * T));
    }
    est.drift_y1_stderr = batch_stderr(bd1);
    est.drift_y2_stderr = batch_stderr(bd2);
    est.diffusion_stderr =
        Sym2{batch_stderr(bm11), batch_stderr(bm12), batch_stderr(bm22)};
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    est.drift_y1_stderr = nan;
    est.drift_y2_stderr = nan;
    est.diffusion_stderr = Sym2{nan, nan, nan};
  }
  return est;
}

EffectiveNoiseReport synthesize_effective_noise(const WienerIncrements& phi2,
                                                double beta1, double beta2,
                                                double window) {
  if (!(phi2.dt > 0.0))
    throw std::invalid_argument("synthesize_effective_noise: path dt must be > 0");
  const double dt = phi2.dt;
  if (window <= 0.0) window = 10.0 / beta1;
  const long steps_per_window = std::max(1l, std::lround(window / dt));

  EffectiveNoiseReport report;
  report.horizon = dt * static_cast<double>(phi2.size());

  QuadNoiseState s;
  s.beta1 = beta1;
  s.beta2 = beta2;

  // q = (z1 - 3 z2) phi2 integrates to M = (y1 - 3 y2); drift-corrected
  // increments of M over windows estimate the effective-noise variance rate.
  std::vector<double> dm, dwsum;
  double window_m0 = 0.0, window_w = 0.0;
  long in_window = 0;
  double total_q = 0.0;
  for (double dw : phi2.increments) {
    const QuadNoiseState next = quad_step(s, dw, dt);
    window_w += dw;
    ++in_window;
    if (in_window == steps_per_window) {
      const double m = (next.y1 - 3.0 * next.y2) - 0.5 * next.time;
      dm.push_back(m - window_m0);
      dwsum.push_back(window_w);
      window_m0 = m;
      window_w = 0.0;
      in_window = 0;
    }
    s = next;
  }
  total_q = s.y1 - 3.0 * s.y2;

  const double total_t = s.time;
  report.mean_rate = total_t > 0.0 ? total_q / total_t : 0.0;
  report.bins_used = static_cast<int>(dm.size());
  if (dm.size() >= 2) {
    const double win_t = steps_per_window * dt;
    // E[dm] = 0 by construction; use the raw second moment.
    double m2 = 0.0;
    for (double v : dm) m2 += v * v;
    m2 /= static_cast<double>(dm.size());
    report.variance_rate = m2 / win_t;
    report.variance_rate_stderr =
        report.variance_rate * std::sqrt(2.0 / static_cast<double>(dm.size()));
    report.folded_variance = report.variance_rate / (44.0 * 44.0);

    // Decorrelation from phi2 over bins of growing width.
    for (int mult : {1, 2, 4}) {
      const std::size_t group = static_cast<std::size_t>(mult);
      std::vector<double> gm, gw;
      for (std::size_t i = 0; i + group <= dm.size(); i += group) {
        double sm = 0.0, sw = 0.0;
        for (std::size_t j = 0; j < group; ++j) {
          sm += dm[i + j];
          sw += dwsum[i + j];
        }
        gm.push_back(sm);
        gw.push_back(sw);
      }
      if (gm.size() < 3) break;
      const double c = covariance(gm, gw);
      const double corr = c / std::sqrt(variance(gm) * variance(gw));
      report.bin_widths.push_back(win_t * mult);
      report.bin_correlation.push_back(corr);
      report.bin_correlation_stderr.push_back(
          1.0 / std::sqrt(static_cast<double>(gm.size())));
    }
  }
  return report;
}

}  // namespace sburg
