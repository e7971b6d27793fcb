#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sburg/ensemble.hpp"
#include "sburg/io.hpp"
#include "sburg/stats.hpp"

namespace sburg {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

enum class ExperimentKind { fig1, fig2, fig3, fig4, fig5, sweep, resonance, track };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Every knob an experiment run depends on. The echo of this struct in a
/// run's summary is sufficient to reproduce the data files byte-identically.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::fig1;
  std::uint64_t master_seed = 2025;
  int ensemble = 1;
  double dt = 0.01;
  int n_interior = 15;  // dx = pi/(n_interior+1)
  double gamma = 0.0;
  std::vector<double> sigmas = {1.0};
  double horizon = 3.0;
  std::vector<int> noise_modes = {2};
  double a0 = 0.5;  // initial sin x amplitude
  double output_every = 0.0;    // <= dt -> every step
  double snapshot_every = 0.0;  // 0 -> no field snapshots
  // resonance knobs
  double beta1 = 3.0;
  double beta2 = 8.0;
  double burn_in = -1.0;
  // track knobs
  double track_sigma = 0.1;
  EnsembleMode mode = kDefaultEnsembleMode;

  double dx() const;
};

/// Caption defaults for each experiment kind.
ExperimentConfig default_config(ExperimentKind kind);

nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads a flat config object (or a run summary: the "config" subobject is
/// used when present) over the kind's defaults. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Everything one run produces: named series tables plus a JSON summary
/// carrying the config echo, statistics and versions.
struct RunRecord {
  std::vector<std::pair<std::string, SeriesTable>> series;
  nlohmann::json summary;
  int blowups = 0;
  bool all_blown_up = false;
};

RunRecord run_figure(const ExperimentConfig& config);
RunRecord run_sweep(const ExperimentConfig& config);
RunRecord run_resonance_experiment(const ExperimentConfig& config);
RunRecord run_track(const ExperimentConfig& config);
RunRecord run_experiment(const ExperimentConfig& config);

/// Writes the record's series files (csv or json) and its summary JSON into
/// out_dir; returns the list of paths written.
std::vector<std::string> persist(const RunRecord& record,
                                 const std::string& out_dir,
                                 const std::string& format = "csv");

/// Top Lyapunov exponent of the weak model linearized at a = 0, estimated as
/// the ensemble mean of ln|a(T)/a(0)|/T from a(0) = 1e-6, against the
/// prediction -(gamma + sigma^2/88).
struct LyapunovPoint {
  double sigma = 0.0;
  double lambda = 0.0;
  double stderr_lambda = 0.0;
  double predicted = 0.0;
};

std::vector<LyapunovPoint> stability_sweep(const std::vector<double>& sigmas,
                                           double gamma, int ensemble, double T,
                                           double dt,
                                           std::uint64_t master_seed = 2025,
                                           EnsembleMode mode = kDefaultEnsembleMode);

/// Shared-path tracking of the SPDE against both strong models. The gap is
/// measured on the sin x amplitude at every step; levels are {sigma, sigma/2}
/// plus the sigma = 0 discretization baseline.
struct TrackingLevel {
  double sigma = 0.0;
  double max_gap_normal_form = 0.0;
  double rms_gap_normal_form = 0.0;
  double max_gap_naive = 0.0;
  double rms_gap_naive = 0.0;
};

struct TrackingReport {
  double gamma = 0.0;
  double dt = 0.0;
  int n_interior = 0;
  double horizon = 0.0;
  double a0 = 0.0;
  TrackingLevel full;     // at sigma
  TrackingLevel half;     // at sigma/2
  double baseline_gap = 0.0;  // sigma = 0 (both models coincide)
  double ratio_normal_form = 0.0;
  double ratio_naive = 0.0;
  std::vector<double> t;
  std::vector<double> a_spde;
  std::vector<double> a_normal_form;
};

TrackingReport compare_strong(std::uint64_t seed, double sigma, double gamma,
                              double horizon, int n_interior, double dt,
                              double a0 = 0.2);

/// Runs the quick always-true example set; prints one line per check to out
/// and returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace sburg
