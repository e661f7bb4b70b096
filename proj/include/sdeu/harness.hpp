#pragma once

#include "sdeu/baselines.hpp"
#include "sdeu/io.hpp"
#include "sdeu/scoring.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sdeu {

enum class Forecaster { oracle_rebranch, historical_simulation, dcc_garch };

const char* to_string(Forecaster f);
/// Throws ConfigError on an unknown name.
Forecaster forecaster_from_string(const std::string& name);

/// Zero-shot recovery protocol. Defaults reproduce the reference setup:
/// 200 level-7 systems, N = 10 targets, no features, T = 504 over t_in = 2,
/// H = 63 over t_out = 0.25, 1000 oracle and 1000 forecast paths.
struct ExperimentConfig {
    std::uint64_t root_seed = 0;
    std::size_t n_systems = 200;
    int level = 7;
    int n_features = 0;
    int n_targets = 10;
    std::size_t history_steps = 504;
    double t_in = 2.0;
    std::size_t horizon = 63;
    double t_out = 0.25;
    std::size_t n_oracle_paths = 1000;
    std::size_t n_forecast_paths = 1000;
    std::vector<Forecaster> forecasters{Forecaster::oracle_rebranch, Forecaster::historical_simulation,
                                        Forecaster::dcc_garch};
    std::filesystem::path output_dir = "results";
    unsigned thread_count = 0;  // 0: all hardware threads
    std::size_t burn_in_steps = 0;
    bool strict = false;               // drop systems with fallback fits from aggregates
    double max_failure_fraction = 0.05;
    bool write_plots = true;

    /// Throws ConfigError on an invalid combination.
    void validate() const;
};

Json to_json(const ExperimentConfig& c);
/// Keys absent from `j` keep their value in `base`.
ExperimentConfig config_from_json(const Json& j, ExperimentConfig base = {});

/// Outcome of one system in a recovery run.
struct SystemOutcome {
    std::size_t index = 0;
    std::string system_id;
    bool failed = false;
    std::string error;
    std::vector<ScoreReport> reports;  // one per forecaster, roster order
    bool any_fallback = false;
    std::vector<std::string> fit_rows;  // fit_status.csv rows for this system
    double seconds = 0.0;
};

struct SummaryRow {
    std::string forecaster_id;
    std::string horizon;  // "1".."H" or "avg"
    double energy = 0.0;
    double marginal_energy = 0.0;
    double crps_sum = 0.0;
    double energy_gap_pct = 0.0;  // NaN when no baseline is in the roster
    double marginal_energy_gap_pct = 0.0;
    double crps_sum_gap_pct = 0.0;
};

struct RecoveryResult {
    std::vector<SystemOutcome> systems;
    std::vector<SummaryRow> summary;
    std::size_t n_failed = 0;
    std::size_t n_aggregated = 0;

    [[nodiscard]] double failure_fraction() const {
        return systems.empty() ? 0.0 : static_cast<double>(n_failed) / static_cast<double>(systems.size());
    }
};

/// System identifier used in every table ("sys0000", ...).
std::string system_id(std::size_t index);

/// Per-system stream: root -> recovery tag -> index.
RngStream system_stream(std::uint64_t root_seed, std::size_t index);

/// Runs the protocol and, when `write_outputs`, writes scores.csv,
/// summary.csv, fit_status.csv, failures.csv, timings.json and one SVG per
/// metric into config.output_dir.
RecoveryResult run_recovery(const ExperimentConfig& config, bool write_outputs = true);

/// Mean per forecaster per horizon across aggregated systems, plus the
/// percentage gap to the best baseline at that horizon.
std::vector<SummaryRow> summarize(const std::vector<SystemOutcome>& systems,
                                  const std::vector<Forecaster>& roster, std::size_t horizon, bool strict,
                                  std::size_t* n_aggregated = nullptr);

/// One procedural record: sampled spec, its history, and oracle branches from
/// the history's terminal state.
TrainingRecord make_training_record(const ExperimentConfig& config, std::size_t index);

/// Writes n_records records to `sink` in the framed record format.
std::size_t export_training_stream(const ExperimentConfig& config, std::size_t n_records,
                                   const std::filesystem::path& sink);

/// Scores two SampleSet frame files exactly as score_forecast would in process.
ScoreReport score_external(const std::filesystem::path& forecast_file, const std::filesystem::path& oracle_file,
                           std::size_t n_targets);

/// Minimal standalone SVG line chart; one series per forecaster.
std::string render_metric_svg(const std::string& title, const std::vector<std::string>& series_names,
                              const std::vector<std::vector<double>>& series);

}  // namespace sdeu
