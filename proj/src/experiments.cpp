#include "sburg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <stdexcept>

#include "sburg/errors.hpp"
#include "sburg/heun.hpp"
#include "sburg/reduced_models.hpp"
#include "sburg/resonance.hpp"
#include "sburg/rng.hpp"
#include "sburg/spde.hpp"

namespace sburg {

namespace {

std::string sigma_label(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

double wall_ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fig1: return "fig1";
    case ExperimentKind::fig2: return "fig2";
    case ExperimentKind::fig3: return "fig3";
    case ExperimentKind::fig4: return "fig4";
    case ExperimentKind::fig5: return "fig5";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::resonance: return "resonance";
    case ExperimentKind::track: return "track";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  static const std::map<std::string, ExperimentKind> table = {
      {"fig1", ExperimentKind::fig1},         {"fig2", ExperimentKind::fig2},
      {"fig3", ExperimentKind::fig3},         {"fig4", ExperimentKind::fig4},
      {"fig5", ExperimentKind::fig5},         {"sweep", ExperimentKind::sweep},
      {"resonance", ExperimentKind::resonance}, {"track", ExperimentKind::track}};
  const auto it = table.find(name);
  if (it == table.end())
    throw std::invalid_argument("unknown experiment kind: " + name);
  return it->second;
}

double ExperimentConfig::dx() const { return M_PI / (n_interior + 1); }

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::fig1:
      // gamma=0, sigma=1, first seven modes, dx=pi/16, dt=0.01, 0<t<3
      c.gamma = 0.0;
      c.sigmas = {1.0};
      c.noise_modes = {1, 2, 3, 4, 5, 6, 7};
      c.n_interior = 15;
      c.dt = 0.01;
      c.horizon = 3.0;
      c.snapshot_every = 0.05;
      break;
    case ExperimentKind::fig2:
      // strong normal-form model, gamma=-0.03, dt=0.1, sigma in {0.5, 2}
      c.gamma = -0.03;
      c.sigmas = {0.5, 2.0};
      c.dt = 0.1;
      c.horizon = 30.0;
      break;
    case ExperimentKind::fig3:
      // SPDE, sigma=0.5, gamma=-0.03, dt=0.05, dx=pi/8
      c.gamma = -0.03;
      c.sigmas = {0.5};
      c.noise_modes = {2};
      c.n_interior = 7;
      c.dt = 0.05;
      c.horizon = 30.0;
      break;
    case ExperimentKind::fig4:
      // SPDE, sigma=2, otherwise as fig3
      c.gamma = -0.03;
      c.sigmas = {2.0};
      c.noise_modes = {2};
      c.n_interior = 7;
      c.dt = 0.05;
      c.horizon = 30.0;
      break;
    case ExperimentKind::fig5:
      // weak model over long times: dt=1, gamma=-0.03, sigma in {0.5, 2}
      c.gamma = -0.03;
      c.sigmas = {0.5, 2.0};
      c.dt = 1.0;
      c.horizon = 300.0;
      break;
    case ExperimentKind::sweep:
      c.gamma = -0.03;
      c.sigmas = {0.5, 2.0};
      c.dt = 0.1;
      c.horizon = 200.0;
      c.ensemble = 1000;
      c.a0 = 1e-6;
      break;
    case ExperimentKind::resonance:
      c.ensemble = 10000;
      c.dt = 0.005;
      c.horizon = 50.0;
      c.output_every = 0.1;
      break;
    case ExperimentKind::track:
      c.gamma = 0.0;
      c.track_sigma = 0.1;
      c.n_interior = 31;
      c.dt = 0.0025;
      c.horizon = 10.0;
      c.a0 = 0.2;
      break;
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["kind"] = to_string(c.kind);
  j["master_seed"] = c.master_seed;
  j["ensemble"] = c.ensemble;
  j["dt"] = c.dt;
  j["n_interior"] = c.n_interior;
  j["dx"] = c.dx();
  j["gamma"] = c.gamma;
  j["sigmas"] = c.sigmas;
  j["horizon"] = c.horizon;
  j["noise_modes"] = c.noise_modes;
  j["a0"] = c.a0;
  j["output_every"] = c.output_every;
  j["snapshot_every"] = c.snapshot_every;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["burn_in"] = c.burn_in;
  j["track_sigma"] = c.track_sigma;
  j["mode"] = c.mode == EnsembleMode::parallel ? "parallel" : "serial";
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& input) {
  const nlohmann::json& j =
      input.contains("config") ? input.at("config") : input;
  if (!j.contains("kind"))
    throw std::invalid_argument("config: missing 'kind'");
  ExperimentConfig c = default_config(
      experiment_kind_from_string(j.at("kind").get<std::string>()));

  static const std::vector<std::string> known = {
      "kind",       "master_seed", "seed",        "ensemble",  "dt",
      "n_interior", "dx",          "gamma",       "sigma",     "sigmas",
      "horizon",    "noise_modes", "a0",          "output_every",
      "snapshot_every", "beta1",   "beta2",       "burn_in",   "track_sigma",
      "mode"};
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw std::invalid_argument("config: unknown key '" + item.key() + "'");

  if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("ensemble")) c.ensemble = j.at("ensemble").get<int>();
  if (j.contains("dt")) c.dt = j.at("dt").get<double>();
  if (j.contains("n_interior")) c.n_interior = j.at("n_interior").get<int>();
  else if (j.contains("dx")) {
    const double dx = j.at("dx").get<double>();
    if (!(dx > 0.0) || dx >= M_PI) throw std::invalid_argument("config: bad dx");
    c.n_interior = static_cast<int>(std::lround(M_PI / dx)) - 1;
  }
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("sigmas")) c.sigmas = j.at("sigmas").get<std::vector<double>>();
  if (j.contains("sigma")) c.sigmas = {j.at("sigma").get<double>()};
  if (j.contains("horizon")) c.horizon = j.at("horizon").get<double>();
  if (j.contains("noise_modes"))
    c.noise_modes = j.at("noise_modes").get<std::vector<int>>();
  if (j.contains("a0")) c.a0 = j.at("a0").get<double>();
  if (j.contains("output_every")) c.output_every = j.at("output_every").get<double>();
  if (j.contains("snapshot_every"))
    c.snapshot_every = j.at("snapshot_every").get<double>();
  if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
  if (j.contains("burn_in")) c.burn_in = j.at("burn_in").get<double>();
  if (j.contains("track_sigma")) c.track_sigma = j.at("track_sigma").get<double>();
  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "parallel") c.mode = EnsembleMode::parallel;
    else if (m == "serial") c.mode = EnsembleMode::serial;
    else throw std::invalid_argument("config: mode must be serial or parallel");
  }
  return c;
}

namespace {

void validate_config(const ExperimentConfig& c) {
  if (!(c.dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
  if (!(c.horizon > 0.0)) throw std::invalid_argument("config: horizon must be > 0");
  if (c.ensemble < 1) throw std::invalid_argument("config: ensemble must be >= 1");
  if (c.n_interior < 1) throw std::invalid_argument("config: n_interior must be >= 1");
  if (c.sigmas.empty()) throw std::invalid_argument("config: need at least one sigma");
  for (double s : c.sigmas)
    if (s < 0.0) throw std::invalid_argument("config: sigma must be >= 0");
  if (!(c.beta1 > 0.0) || !(c.beta2 > 0.0))
    throw std::invalid_argument("config: betas must be > 0");
}

struct MemberSeries {
  std::vector<double> a;
  bool blew_up = false;
  double blowup_time = 0.0;
};

std::vector<double> output_times(double dt, double horizon, double output_every) {
  const long nsteps = std::lround(horizon / dt);
  const long stride = output_every <= dt ? 1 : std::lround(output_every / dt);
  std::vector<double> t;
  t.push_back(0.0);
  for (long s = 1; s <= nsteps; ++s)
    if (s % stride == 0 || s == nsteps) t.push_back(s * dt);
  return t;
}

MemberSeries run_spde_member(const ExperimentConfig& c, double sigma, int member) {
  SpdeParams p;
  p.gamma = c.gamma;
  p.sigma = sigma;
  p.noise_modes = c.noise_modes;
  p.dt = c.dt;
  const Grid grid(c.n_interior);
  MemberSeries out;
  try {
    const SpdeSeries s =
        run_spde(p, grid, make_mode_field(grid, 1, c.a0), c.master_seed,
                 c.horizon, c.output_every, 0.0, static_cast<std::uint64_t>(member));
    out.a = s.a;
  } catch (const BlowupError& e) {
    out.blew_up = true;
    out.blowup_time = e.time();
  }
  return out;
}

MemberSeries run_strong_member(const ExperimentConfig& c, double sigma,
                               int member) {
  ModelParams p{c.gamma, sigma};
  Rng rng(c.master_seed, make_stream(static_cast<std::uint64_t>(member), 2));
  const long nsteps = std::lround(c.horizon / c.dt);
  const long stride = c.output_every <= c.dt ? 1 : std::lround(c.output_every / c.dt);
  const double root_dt = std::sqrt(c.dt);
  StrongModelState s;
  s.a = c.a0;
  MemberSeries out;
  out.a.push_back(s.a);
  try {
    for (long k = 1; k <= nsteps; ++k) {
      s = step_strong_model(s, p, StrongVariant::normal_form,
                            root_dt * rng.normal(), c.dt);
      if (k % stride == 0 || k == nsteps) out.a.push_back(s.a);
    }
  } catch (const BlowupError& e) {
    out.blew_up = true;
    out.blowup_time = e.time();
  }
  return out;
}

MemberSeries run_weak_member(const ExperimentConfig& c, double sigma, int member) {
  ModelParams p{c.gamma, sigma};
  Rng phi(c.master_seed, make_stream(static_cast<std::uint64_t>(member), 2));
  Rng psi(c.master_seed, make_stream(static_cast<std::uint64_t>(member), kPsiChannel));
  const long nsteps = std::lround(c.horizon / c.dt);
  const long stride = c.output_every <= c.dt ? 1 : std::lround(c.output_every / c.dt);
  const double root_dt = std::sqrt(c.dt);
  WeakModelState s;
  s.a = c.a0;
  MemberSeries out;
  out.a.push_back(s.a);
  try {
    for (long k = 1; k <= nsteps; ++k) {
      s = step_weak_model(s, p, root_dt * phi.normal(), root_dt * psi.normal(),
                          c.dt);
      if (k % stride == 0 || k == nsteps) out.a.push_back(s.a);
    }
  } catch (const BlowupError& e) {
    out.blew_up = true;
    out.blowup_time = e.time();
  }
  return out;
}

}  // namespace

RunRecord run_figure(const ExperimentConfig& c) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  const std::vector<double> times = output_times(c.dt, c.horizon, c.output_every);
  nlohmann::json stats = nlohmann::json::object();
  int total_blowups = 0;
  int total_members = 0;

  const bool is_spde = c.kind == ExperimentKind::fig1 ||
                       c.kind == ExperimentKind::fig3 ||
                       c.kind == ExperimentKind::fig4;
  const bool is_weak = c.kind == ExperimentKind::fig5;
  if (!is_spde && !is_weak && c.kind != ExperimentKind::fig2)
    throw std::invalid_argument("run_figure: kind is not a figure");

  for (double sigma : c.sigmas) {
    const std::vector<MemberSeries> members = ensemble_map<MemberSeries>(
        c.ensemble,
        [&](int k) {
          if (is_spde) return run_spde_member(c, sigma, k);
          if (is_weak) return run_weak_member(c, sigma, k);
          return run_strong_member(c, sigma, k);
        },
        c.mode);

    int blowups = 0;
    for (const MemberSeries& m : members) blowups += m.blew_up;
    total_blowups += blowups;
    total_members += c.ensemble;

    const std::string label =
        c.sigmas.size() > 1 ? "_s" + sigma_label(sigma) : "";
    nlohmann::json sstats;
    sstats["sigma"] = sigma;
    sstats["blowups"] = blowups;

    if (c.ensemble == 1) {
      if (blowups == 1) {
        sstats["blowup_time"] = members[0].blowup_time;
      } else {
        SeriesTable table;
        table.columns = {"t", "a"};
        for (std::size_t i = 0; i < times.size(); ++i)
          table.rows.push_back({times[i], members[0].a[i]});
        sstats["final_a"] = members[0].a.back();
        rec.series.emplace_back(to_string(c.kind) + label + "_a", std::move(table));
      }
    } else {
      // Aggregated ensemble series: median |a|(t) over surviving members.
      SeriesTable table;
      table.columns = {"t", "a"};
      std::vector<double> finals;
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> vals;
        for (const MemberSeries& m : members)
          if (!m.blew_up) vals.push_back(std::abs(m.a[i]));
        if (vals.empty()) break;
        table.rows.push_back({times[i], median(vals)});
      }
      for (const MemberSeries& m : members)
        if (!m.blew_up) finals.push_back(std::abs(m.a.back()));
      if (!finals.empty()) {
        sstats["median_abs_final"] = median(finals);
        sstats["survivors"] = finals.size();
        rec.series.emplace_back(to_string(c.kind) + label + "_median_abs_a",
                                std::move(table));
      }
    }
    stats["per_sigma"].push_back(sstats);
  }

  // fig1 keeps the full space-time mesh (long format, fixed 3 columns).
  if (c.kind == ExperimentKind::fig1 && c.snapshot_every > 0.0 && c.ensemble == 1) {
    SpdeParams p;
    p.gamma = c.gamma;
    p.sigma = c.sigmas[0];
    p.noise_modes = c.noise_modes;
    p.dt = c.dt;
    const Grid grid(c.n_interior);
    try {
      const SpdeSeries s =
          run_spde(p, grid, make_mode_field(grid, 1, c.a0), c.master_seed,
                   c.horizon, c.output_every, c.snapshot_every, 0);
      SeriesTable mesh;
      mesh.columns = {"t", "x", "u"};
      for (std::size_t si = 0; si < s.snapshot_t.size(); ++si)
        for (int i = 0; i < grid.n_interior; ++i)
          mesh.rows.push_back({s.snapshot_t[si], grid.x(i), s.snapshots[si][i]});
      rec.series.emplace_back(to_string(c.kind) + "_field", std::move(mesh));
    } catch (const BlowupError&) {
      // amplitude pass already recorded the blow-up
    }
  }

  rec.blowups = total_blowups;
  rec.all_blown_up = total_blowups == total_members;
  rec.summary["schema_version"] = kSchemaVersion;
  rec.summary["tool"] = {{"name", "sburg"}, {"version", kToolVersion}};
  rec.summary["config"] = config_to_json(c);
  rec.summary["stats"] = stats;
  rec.summary["blowups"] = total_blowups;
  rec.summary["wall_ms"] = wall_ms_since(t0);
  return rec;
}

std::vector<LyapunovPoint> stability_sweep(const std::vector<double>& sigmas,
                                           double gamma, int ensemble, double T,
                                           double dt, std::uint64_t master_seed,
                                           EnsembleMode mode) {
  if (ensemble < 1) throw std::invalid_argument("stability_sweep: ensemble >= 1");
  const double a0 = 1e-6;
  std::vector<LyapunovPoint> points;
  for (double sigma : sigmas) {
    const ModelParams p{gamma, sigma};
    const long nsteps = std::lround(T / dt);
    const double root_dt = std::sqrt(dt);
    const std::vector<double> logs = ensemble_map<double>(
        ensemble,
        [&](int k) {
          Rng phi(master_seed, make_stream(static_cast<std::uint64_t>(k), 2));
          Rng psi(master_seed,
                  make_stream(static_cast<std::uint64_t>(k), kPsiChannel));
          WeakModelState s;
          s.a = a0;
          for (long i = 0; i < nsteps; ++i)
            s = step_weak_model(s, p, root_dt * phi.normal(),
                                root_dt * psi.normal(), dt);
          return std::log(std::abs(s.a) / a0) / T;
        },
        mode);
    LyapunovPoint pt;
    pt.sigma = sigma;
    pt.lambda = mean(logs);
    pt.stderr_lambda = stderr_of_mean(logs);
    pt.predicted = -(gamma + sigma * sigma * kResonantDriftFactor);
    points.push_back(pt);
  }
  return points;
}

RunRecord run_sweep(const ExperimentConfig& c) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<LyapunovPoint> points = stability_sweep(
      c.sigmas, c.gamma, c.ensemble, c.horizon, c.dt, c.master_seed, c.mode);

  RunRecord rec;
  nlohmann::json results = nlohmann::json::array();
  for (const LyapunovPoint& p : points)
    results.push_back({{"sigma", p.sigma},
                       {"lambda", p.lambda},
                       {"stderr", p.stderr_lambda},
                       {"predicted", p.predicted}});
  rec.summary["schema_version"] = kSchemaVersion;
  rec.summary["tool"] = {{"name", "sburg"}, {"version", kToolVersion}};
  rec.summary["config"] = config_to_json(c);
  rec.summary["stats"]["lyapunov"] = results;
  rec.summary["stats"]["stabilizing_sigma"] =
      c.gamma < 0.0 ? std::sqrt(-88.0 * c.gamma) : 0.0;
  rec.summary["blowups"] = 0;
  rec.summary["wall_ms"] = wall_ms_since(t0);
  return rec;
}

RunRecord run_resonance_experiment(const ExperimentConfig& c) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  ResonanceConfig rc;
  rc.master_seed = c.master_seed;
  rc.ensemble = c.ensemble;
  rc.horizon = c.horizon;
  rc.dt = c.dt;
  rc.beta1 = c.beta1;
  rc.beta2 = c.beta2;
  rc.burn_in = c.burn_in;
  rc.mode = c.mode;
  const DriftDiffusionEstimate est = estimate_long_time_stats(rc);

  RunRecord rec;
  rec.blowups = est.blowups;
  rec.all_blown_up = est.ensemble_size == 0;

  // Sample trajectory (member 0) for inspection, same stream as the
  // estimator's member 0.
  {
    Rng rng(c.master_seed, make_stream(0, 2));
    QuadNoiseState s;
    s.beta1 = c.beta1;
    s.beta2 = c.beta2;
    const double root_dt = std::sqrt(c.dt);
    const long burn_steps = std::lround(est.burn_in / c.dt);
    for (long i = 0; i < burn_steps; ++i)
      s = quad_step(s, root_dt * rng.normal(), c.dt);
    s.y1 = 0.0;
    s.y2 = 0.0;
    s.time = 0.0;
    const long nsteps = std::lround(c.horizon / c.dt);
    const long stride =
        c.output_every <= c.dt ? 1 : std::lround(c.output_every / c.dt);
    SeriesTable table;
    table.columns = {"t", "y1", "y2", "z1", "z2"};
    table.rows.push_back({0.0, s.y1, s.y2, s.z1, s.z2});
    try {
      for (long k = 1; k <= nsteps; ++k) {
        s = quad_step(s, root_dt * rng.normal(), c.dt);
        if (k % stride == 0 || k == nsteps)
          table.rows.push_back({s.time, s.y1, s.y2, s.z1, s.z2});
      }
      rec.series.emplace_back("resonance_sample", std::move(table));
    } catch (const BlowupError&) {
    }
  }

  nlohmann::json stats;
  stats["drift"] = {est.drift_y1, est.drift_y2};
  stats["drift_stderr"] = {est.drift_y1_stderr, est.drift_y2_stderr};
  stats["diffusion"] = {{est.diffusion.m11, est.diffusion.m12},
                        {est.diffusion.m12, est.diffusion.m22}};
  stats["diffusion_stderr"] = {
      {est.diffusion_stderr.m11, est.diffusion_stderr.m12},
      {est.diffusion_stderr.m12, est.diffusion_stderr.m22}};
  const Sym2 expected = theoretical_diffusion(c.beta1, c.beta2);
  stats["diffusion_theory"] = {{expected.m11, expected.m12},
                               {expected.m12, expected.m22}};
  stats["z_covariance"] = {{est.z_covariance.m11, est.z_covariance.m12},
                           {est.z_covariance.m12, est.z_covariance.m22}};
  const Sym2 zc = stationary_z_covariance(c.beta1, c.beta2);
  stats["z_covariance_theory"] = {{zc.m11, zc.m12}, {zc.m12, zc.m22}};
  stats["stderr_reliable"] = est.stderr_reliable;
  stats["survivors"] = est.ensemble_size;
  stats["burn_in"] = est.burn_in;

  rec.summary["schema_version"] = kSchemaVersion;
  rec.summary["tool"] = {{"name", "sburg"}, {"version", kToolVersion}};
  rec.summary["config"] = config_to_json(c);
  rec.summary["stats"] = stats;
  rec.summary["blowups"] = est.blowups;
  rec.summary["wall_ms"] = wall_ms_since(t0);
  return rec;
}

namespace {

struct SharedPathRun {
  std::vector<double> t;
  std::vector<double> a_spde;
  std::vector<double> a_normal_form;
  std::vector<double> a_naive;
};

SharedPathRun run_shared_path(std::uint64_t seed, double sigma, double gamma,
                              double horizon, int n_interior, double dt,
                              double a0) {
  const Grid grid(n_interior);
  SpdeParams sp;
  sp.gamma = gamma;
  sp.sigma = sigma;
  sp.noise_modes = {2};
  sp.dt = dt;
  validate(sp);

  // Manifold-consistent initial data: a0 sin x - (a0^2/6) sin 2x.
  FieldState field = make_mode_field(grid, 1, a0);
  {
    const FieldState s2 = make_mode_field(grid, 2, -a0 * a0 / 6.0);
    for (int i = 0; i < grid.n_interior; ++i) field.u[i] += s2.u[i];
  }

  const ModelParams mp{gamma, sigma};
  StrongModelState nf, nv;
  nf.a = nv.a = a0;

  Rng rng(seed, make_stream(0, 2));
  const double root_dt = std::sqrt(dt);
  const long nsteps = std::lround(horizon / dt);

  SharedPathRun out;
  out.t.push_back(0.0);
  out.a_spde.push_back(project_amplitude(field, grid));
  out.a_normal_form.push_back(nf.a);
  out.a_naive.push_back(nv.a);
  std::vector<double> dw(1);
  for (long k = 1; k <= nsteps; ++k) {
    dw[0] = root_dt * rng.normal();
    field = spde_step(field, sp, grid, dw);
    nf = step_strong_model(nf, mp, StrongVariant::normal_form, dw[0], dt);
    nv = step_strong_model(nv, mp, StrongVariant::naive, dw[0], dt);
    out.t.push_back(field.time);
    out.a_spde.push_back(project_amplitude(field, grid));
    out.a_normal_form.push_back(nf.a);
    out.a_naive.push_back(nv.a);
  }
  return out;
}

TrackingLevel gaps_at(const SharedPathRun& run, double sigma) {
  TrackingLevel lvl;
  lvl.sigma = sigma;
  double s2_nf = 0.0, s2_nv = 0.0;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    const double gnf = std::abs(run.a_spde[i] - run.a_normal_form[i]);
    const double gnv = std::abs(run.a_spde[i] - run.a_naive[i]);
    lvl.max_gap_normal_form = std::max(lvl.max_gap_normal_form, gnf);
    lvl.max_gap_naive = std::max(lvl.max_gap_naive, gnv);
    s2_nf += gnf * gnf;
    s2_nv += gnv * gnv;
  }
  lvl.rms_gap_normal_form = std::sqrt(s2_nf / run.t.size());
  lvl.rms_gap_naive = std::sqrt(s2_nv / run.t.size());
  return lvl;
}

}  // namespace

TrackingReport compare_strong(std::uint64_t seed, double sigma, double gamma,
                              double horizon, int n_interior, double dt,
                              double a0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("compare_strong: sigma must be > 0");
  TrackingReport rep;
  rep.gamma = gamma;
  rep.dt = dt;
  rep.n_interior = n_interior;
  rep.horizon = horizon;
  rep.a0 = a0;

  const SharedPathRun full =
      run_shared_path(seed, sigma, gamma, horizon, n_interior, dt, a0);
  const SharedPathRun half =
      run_shared_path(seed, sigma / 2.0, gamma, horizon, n_interior, dt, a0);
  const SharedPathRun base =
      run_shared_path(seed, 0.0, gamma, horizon, n_interior, dt, a0);

  rep.full = gaps_at(full, sigma);
  rep.half = gaps_at(half, sigma / 2.0);
  rep.baseline_gap = gaps_at(base, 0.0).max_gap_normal_form;
  rep.ratio_normal_form =
      rep.full.max_gap_normal_form / rep.half.max_gap_normal_form;
  rep.ratio_naive = rep.full.max_gap_naive / rep.half.max_gap_naive;
  rep.t = full.t;
  rep.a_spde = full.a_spde;
  rep.a_normal_form = full.a_normal_form;
  return rep;
}

RunRecord run_track(const ExperimentConfig& c) {
  validate_config(c);
  const auto t0 = std::chrono::steady_clock::now();
  const TrackingReport rep =
      compare_strong(c.master_seed, c.track_sigma, c.gamma, c.horizon,
                     c.n_interior, c.dt, c.a0);

  RunRecord rec;
  SeriesTable spde_table, model_table;
  spde_table.columns = {"t", "a"};
  model_table.columns = {"t", "a"};
  for (std::size_t i = 0; i < rep.t.size(); ++i) {
    spde_table.rows.push_back({rep.t[i], rep.a_spde[i]});
    model_table.rows.push_back({rep.t[i], rep.a_normal_form[i]});
  }
  rec.series.emplace_back("track_spde_a", std::move(spde_table));
  rec.series.emplace_back("track_model_a", std::move(model_table));

  auto level_json = [](const TrackingLevel& l) {
    return nlohmann::json{{"sigma", l.sigma},
                          {"max_gap_normal_form", l.max_gap_normal_form},
                          {"rms_gap_normal_form", l.rms_gap_normal_form},
                          {"max_gap_naive", l.max_gap_naive},
                          {"rms_gap_naive", l.rms_gap_naive}};
  };
  nlohmann::json stats;
  stats["full"] = level_json(rep.full);
  stats["half"] = level_json(rep.half);
  stats["baseline_gap"] = rep.baseline_gap;
  stats["ratio_normal_form"] = rep.ratio_normal_form;
  stats["ratio_naive"] = rep.ratio_naive;

  rec.summary["schema_version"] = kSchemaVersion;
  rec.summary["tool"] = {{"name", "sburg"}, {"version", kToolVersion}};
  rec.summary["config"] = config_to_json(c);
  rec.summary["stats"] = stats;
  rec.summary["blowups"] = 0;
  rec.summary["wall_ms"] = wall_ms_since(t0);
  return rec;
}

RunRecord run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::sweep: return run_sweep(c);
    case ExperimentKind::resonance: return run_resonance_experiment(c);
    case ExperimentKind::track: return run_track(c);
    default: return run_figure(c);
  }
}

std::vector<std::string> persist(const RunRecord& record,
                                 const std::string& out_dir,
                                 const std::string& format) {
  if (format != "csv" && format != "json")
    throw std::invalid_argument("persist: format must be csv or json");
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& [name, table] : record.series) {
    const std::string path =
        (std::filesystem::path(out_dir) / (name + "." + format)).string();
    if (format == "csv") write_series_csv(path, table);
    else write_series_json(path, table);
    written.push_back(path);
  }
  const std::string kind = record.summary.at("config").at("kind").get<std::string>();
  const std::string spath =
      (std::filesystem::path(out_dir) / (kind + "_summary.json")).string();
  write_text_file(spath, record.summary.dump(2) + "\n");
  written.push_back(spath);
  return written;
}

namespace {

bool nearly(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    failures += !ok;
  };

  check("increments: n=0 gives empty sequence",
        generate_increments(7, 0.01, 0).increments.empty());
  {
    const WienerIncrements a = generate_increments(7, 0.01, 256);
    const WienerIncrements b = generate_increments(7, 0.01, 256);
    check("increments: regeneration is bit-identical", a.increments == b.increments);
  }
  {
    SdeState s;
    s.x = {1.0};
    auto f = [](const SdeState& st) { return std::vector<double>{-st.x[0]}; };
    auto g = [](const SdeState&) { return std::vector<double>{0.0}; };
    const SdeState r = heun_step(s, f, g, 0.0, 0.1);
    check("heun: deterministic linear step = 0.905", nearly(r.x[0], 0.905, 1e-15));
    auto f0 = [](const SdeState&) { return std::vector<double>{0.0}; };
    auto g1 = [](const SdeState&) { return std::vector<double>{1.0}; };
    const SdeState r2 = heun_step(s, f0, g1, 0.25, 0.1);
    check("heun: pure additive noise adds dW", nearly(r2.x[0], 1.25, 1e-15));
  }
  {
    ExpFilter f2 = make_filter(2), f3 = make_filter(3);
    for (int i = 0; i < 2000; ++i) {
      f2 = filter_step(f2, 1.0, 0.005);
      f3 = filter_step(f3, 1.0, 0.005);
    }
    check("filter: constant input steady state 1/3", nearly(f2.z, 1.0 / 3.0, 1e-6));
    check("filter: constant input steady state 1/8", nearly(f3.z, 1.0 / 8.0, 1e-6));
  }
  {
    const FilterChain empty;
    check("chain: empty chain is the identity",
          chain_output(empty, 0.7) == 0.7);
    FilterChain one;
    one.stages = {make_filter(2)};
    const FilterChain stepped = chain_step(one, 1.0, 0.01);
    const ExpFilter direct = filter_step(make_filter(2), 1.0, 0.01);
    check("chain: single stage equals filter_step",
          stepped.stages[0].z == direct.z);
  }
  {
    const Sym2 c = stationary_z_covariance(3.0, 8.0);
    check("z-covariance: Var z1 = 1/(2 beta1)", nearly(c.m11, 1.0 / 6.0, 1e-15));
    check("z-covariance: positive definite", c.positive_definite());
  }
  {
    const Grid grid(15);
    SpdeParams p;
    FieldState zero;
    zero.u.assign(grid.n_interior, 0.0);
    const std::vector<double> r = spde_rhs(zero, p, grid, {});
    bool all0 = true;
    for (double v : r) all0 = all0 && v == 0.0;
    check("spde: rhs of u=0 with sigma=0 is 0", all0);
    check("projection: sin x -> 1",
          nearly(project_amplitude(make_mode_field(grid, 1, 1.0), grid), 1.0, 1e-12));
    check("projection: sin 2x -> 0",
          nearly(project_amplitude(make_mode_field(grid, 2, 1.0), grid), 0.0, 1e-12));
  }
  {
    const ModelParams p{-0.03, 1.0};
    StrongModelState s;
    s.a = 0.0;
    s.bank.e2 = 0.4;
    s.bank.e3e2 = -0.2;
    check("models: a=0 is a fixed point of naive rhs", naive_rhs(s, p, 1.3) == 0.0);
    check("models: a=0 is a fixed point of normal-form rhs",
          normal_form_rhs(s, p, 1.3) == 0.0);
    WeakModelState w;
    check("models: a=0 is a fixed point of weak rhs",
          weak_rhs(w, p, 1.3, -0.7) == 0.0);
  }
  {
    // sigma = 0: the two strong variants coincide trajectory-wise.
    const ModelParams p{-0.03, 0.0};
    StrongModelState a, b;
    a.a = b.a = 0.2;
    Rng rng(11, 0);
    bool same = true;
    for (int i = 0; i < 200; ++i) {
      const double dw = 0.1 * rng.normal();
      a = step_strong_model(a, p, StrongVariant::naive, dw, 0.05);
      b = step_strong_model(b, p, StrongVariant::normal_form, dw, 0.05);
      same = same && a.a == b.a;
    }
    check("models: sigma=0 naive and normal-form coincide", same);
  }
  check("equilibrium: gamma=0 -> 0", deterministic_equilibrium(0.0) == 0.0);
  check("equilibrium: gamma=-0.03 -> 0.6",
        nearly(deterministic_equilibrium(-0.03), 0.6, 1e-15));
  {
    const Grid grid(31);
    StrongModelState s;
    s.a = 0.6;
    const ModelParams p{0.0, 0.0};
    const FieldState f = reconstruct_field(s, p, grid);
    check("reconstruct: projects back to a",
          nearly(project_amplitude(f, grid), 0.6, 1e-12));
    StrongModelState z;
    const FieldState f0 = reconstruct_field(z, p, grid);
    bool all0 = true;
    for (double v : f0.u) all0 = all0 && v == 0.0;
    check("reconstruct: a=0, sigma=0 gives the zero field", all0);
  }
  {
    QuadNoiseState q;
    q = quad_step(q, 0.0, 0.01);
    check("quad: rest state stays at rest",
          q.y1 == 0.0 && q.y2 == 0.0 && q.z1 == 0.0 && q.z2 == 0.0);
    const ReplacementCoefficients r = replacement_coefficients(3.0, 8.0);
    check("replacement: (3,8) -> (1/2, 1/sqrt6, 1/(11 sqrt6), 1/44)",
          nearly(r.y1_drift, 0.5, 1e-15) &&
              nearly(r.y1_psi1, 1.0 / std::sqrt(6.0), 1e-15) &&
              nearly(r.y2_psi1, 1.0 / (11.0 * std::sqrt(6.0)), 1e-15) &&
              nearly(r.y2_psi2, 1.0 / 44.0, 1e-15));
    const ReplacementCoefficients rr = replacement_coefficients(3.0, 1e12);
    check("replacement: beta2 -> inf kills the y2 coefficients",
          rr.y2_psi1 < 1e-11 && rr.y2_psi2 < 1e-6);
    const Sym2 d = theoretical_diffusion(5.0, 2.0);
    check("diffusion: symmetric positive definite", d.positive_definite());
  }
  {
    const ExperimentConfig f2 = default_config(ExperimentKind::fig2);
    check("figure defaults: fig2 is gamma=-0.03, dt=0.1, sigma {0.5, 2}",
          f2.gamma == -0.03 && f2.dt == 0.1 &&
              f2.sigmas == std::vector<double>{0.5, 2.0});
    const ExperimentConfig f5 = default_config(ExperimentKind::fig5);
    check("figure defaults: fig5 is dt=1, gamma=-0.03", f5.dt == 1.0 && f5.gamma == -0.03);
  }
  {
    const ModelParams p{-0.03, 2.0};
    WeakModelState w;
    w.a = 0.0;
    Rng rng(3, 0);
    bool zero = true;
    for (int i = 0; i < 100; ++i) {
      w = step_weak_model(w, p, rng.normal(), rng.normal(), 1.0);
      zero = zero && w.a == 0.0;
    }
    check("weak model: a(0)=0 stays exactly 0", zero);
  }
  out << (failures == 0 ? "selftest: all checks passed\n"
                        : "selftest: FAILURES present\n");
  return failures;
}

}  // namespace sburg
