// Command-line front end: figure reproduction, the stability sweep, the
// quadratic-noise resonance estimator, shared-path tracking, and the
// selftest. Exit codes: 0 ok, 1 selftest failures, 2 invalid configuration,
// 3 every trajectory blew up.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sburg/errors.hpp"
#include "sburg/experiments.hpp"
#include "sburg/io.hpp"

namespace {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> ensemble;
  std::optional<double> dt;
  std::optional<double> dx;
  std::optional<double> gamma;
  std::optional<double> sigma;
  std::optional<double> horizon;
  std::string out_dir = "out";
  std::string config_path;
  std::string format = "csv";
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--seed", o.seed, "master seed (per-member streams derive from it)");
  cmd->add_option("--ensemble", o.ensemble, "number of ensemble members");
  cmd->add_option("--dt", o.dt, "time step");
  cmd->add_option("--dx", o.dx, "grid spacing (snapped to pi/(n+1))");
  cmd->add_option("--gamma", o.gamma, "reaction detuning");
  cmd->add_option("--sigma", o.sigma, "noise strength (overrides sigma lists)");
  cmd->add_option("--horizon", o.horizon, "simulation horizon T");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
  cmd->add_option("--format", o.format, "series file format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

sburg::ExperimentConfig build_config(sburg::ExperimentKind kind,
                                     const CliOverrides& o) {
  sburg::ExperimentConfig config = sburg::default_config(kind);
  if (!o.config_path.empty()) {
    const nlohmann::json j = nlohmann::json::parse(sburg::read_text_file(o.config_path));
    config = sburg::config_from_json(j);
    if (config.kind != kind)
      throw std::invalid_argument("config file kind '" +
                                  sburg::to_string(config.kind) +
                                  "' does not match the subcommand");
  }
  if (o.seed) config.master_seed = *o.seed;
  if (o.ensemble) config.ensemble = *o.ensemble;
  if (o.dt) config.dt = *o.dt;
  if (o.dx) {
    if (!(*o.dx > 0.0) || *o.dx >= M_PI)
      throw std::invalid_argument("--dx out of range (0, pi)");
    config.n_interior = static_cast<int>(std::lround(M_PI / *o.dx)) - 1;
  }
  if (o.gamma) config.gamma = *o.gamma;
  if (o.sigma) {
    if (kind == sburg::ExperimentKind::track) config.track_sigma = *o.sigma;
    else config.sigmas = {*o.sigma};
  }
  if (o.horizon) config.horizon = *o.horizon;
  return config;
}

int run(sburg::ExperimentKind kind, const CliOverrides& o) {
  const sburg::ExperimentConfig config = build_config(kind, o);
  const sburg::RunRecord record = sburg::run_experiment(config);
  const std::vector<std::string> written =
      sburg::persist(record, o.out_dir, o.format);
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  if (record.blowups > 0)
    std::cout << "blow-ups: " << record.blowups << " member(s) excluded\n";
  return record.all_blown_up ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic Burgers subgrid-model lab"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string figure_name;

  CLI::App* figure = app.add_subcommand("figure", "reproduce a figure-style run");
  figure->add_option("name", figure_name, "fig1|fig2|fig3|fig4|fig5")->required();
  add_common_flags(figure, o);

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Lyapunov exponents of the weak model across sigma");
  add_common_flags(sweep, o);

  CLI::App* resonance = app.add_subcommand(
      "resonance", "long-time drift/diffusion of the quadratic noises");
  add_common_flags(resonance, o);

  CLI::App* track = app.add_subcommand(
      "track", "shared-path tracking: SPDE vs the strong models");
  add_common_flags(track, o);

  app.add_subcommand("selftest", "run the built-in quick checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (figure->parsed())
      return run(sburg::experiment_kind_from_string(figure_name), o);
    if (sweep->parsed()) return run(sburg::ExperimentKind::sweep, o);
    if (resonance->parsed()) return run(sburg::ExperimentKind::resonance, o);
    if (track->parsed()) return run(sburg::ExperimentKind::track, o);
    return sburg::run_selftest(std::cout) == 0 ? 0 : 1;
  } catch (const sburg::BlowupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
