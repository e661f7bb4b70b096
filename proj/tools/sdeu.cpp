#include "sdeu/error.hpp"
#include "sdeu/harness.hpp"
#include "sdeu/io.hpp"
#include "sdeu/universe.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartialFailure = 2;

struct ConfigFlags {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> systems;
    std::optional<int> level;
    std::optional<int> features;
    std::optional<int> targets;
    std::optional<std::size_t> history_steps;
    std::optional<double> t_in;
    std::optional<std::size_t> horizon;
    std::optional<double> t_out;
    std::optional<std::size_t> oracle_paths;
    std::optional<std::size_t> forecast_paths;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::size_t> burn_in;
    std::optional<double> max_failure_fraction;
    std::vector<std::string> forecasters;
    bool strict = false;
    bool no_plots = false;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "JSON config file; flags override its values");
        app->add_option("--seed", seed, "root seed");
        app->add_option("--systems", systems, "number of systems");
        app->add_option("--level", level, "curriculum level 0..7");
        app->add_option("--features", features, "feature dimensions M");
        app->add_option("--targets", targets, "target dimensions N");
        app->add_option("--history-steps", history_steps, "history length T");
        app->add_option("--t-in", t_in, "history time window");
        app->add_option("--horizon", horizon, "forecast steps H");
        app->add_option("--t-out", t_out, "forecast time window");
        app->add_option("--oracle-paths", oracle_paths, "oracle branch count");
        app->add_option("--forecast-paths", forecast_paths, "paths per forecaster");
        app->add_option("--out", out, "output directory or file");
        app->add_option("--threads", threads, "worker threads, 0 = all cores");
        app->add_option("--burn-in", burn_in, "discarded warm-up steps before the history");
        app->add_option("--max-failure-fraction", max_failure_fraction, "failure fraction that triggers exit code 2");
        app->add_option("--forecasters", forecasters, "subset of oracle_rebranch, historical_simulation, dcc_garch")
            ->delimiter(',');
        app->add_flag("--strict", strict, "exclude systems with fallback fits from aggregates");
        app->add_flag("--no-plots", no_plots, "skip SVG plots");
    }

    sdeu::ExperimentConfig build() const {
        sdeu::ExperimentConfig c;
        if (!config_file.empty()) {
            const sdeu::Bytes bytes = sdeu::read_file(config_file);
            c = sdeu::config_from_json(sdeu::parse_json(std::string_view(
                                           reinterpret_cast<const char*>(bytes.data()), bytes.size())),
                                       c);
        }
        if (seed) c.root_seed = *seed;
        if (systems) c.n_systems = *systems;
        if (level) c.level = *level;
        if (features) c.n_features = *features;
        if (targets) c.n_targets = *targets;
        if (history_steps) c.history_steps = *history_steps;
        if (t_in) c.t_in = *t_in;
        if (horizon) c.horizon = *horizon;
        if (t_out) c.t_out = *t_out;
        if (oracle_paths) c.n_oracle_paths = *oracle_paths;
        if (forecast_paths) c.n_forecast_paths = *forecast_paths;
        if (out) c.output_dir = *out;
        if (threads) c.thread_count = *threads;
        if (burn_in) c.burn_in_steps = *burn_in;
        if (max_failure_fraction) c.max_failure_fraction = *max_failure_fraction;
        if (!forecasters.empty()) {
            c.forecasters.clear();
            for (const auto& f : forecasters) c.forecasters.push_back(sdeu::forecaster_from_string(f));
        }
        if (strict) c.strict = true;
        if (no_plots) c.write_plots = false;
        c.validate();
        return c;
    }
};

int cmd_recover(const ConfigFlags& flags) {
    const sdeu::ExperimentConfig config = flags.build();
    const sdeu::RecoveryResult result = sdeu::run_recovery(config);
    std::cerr << "systems: " << result.systems.size() << ", failed: " << result.n_failed
              << ", aggregated: " << result.n_aggregated << ", output: " << config.output_dir.string() << '\n';
    for (const auto& row : result.summary) {
        if (row.horizon == "avg") {
            std::cout << row.forecaster_id << " avg energy " << row.energy << ", marginal " << row.marginal_energy
                      << ", crps_sum " << row.crps_sum << '\n';
        }
    }
    return result.failure_fraction() > config.max_failure_fraction ? kExitPartialFailure : kExitOk;
}

int cmd_export(const ConfigFlags& flags, std::size_t records) {
    sdeu::ExperimentConfig config = flags.build();
    if (!flags.out) throw sdeu::ConfigError("export-stream requires --out");
    const std::size_t n = sdeu::export_training_stream(config, records, *flags.out);
    std::cerr << "wrote " << n << " records to " << *flags.out << '\n';
    return kExitOk;
}

int cmd_score(const std::string& forecast, const std::string& oracle, std::size_t targets) {
    const sdeu::ScoreReport report = sdeu::score_external(forecast, oracle, targets);
    std::cout << sdeu::kScoreCsvHeader << '\n';
    sdeu::write_score_rows(std::cout, report);
    return kExitOk;
}

int cmd_validate_spec(const std::string& path) {
    const sdeu::Bytes bytes = sdeu::read_file(path);
    const sdeu::SdeSystemSpec spec = sdeu::spec_from_json(
        sdeu::parse_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
    const auto problems = sdeu::validate_spec(spec);
    if (problems.empty()) {
        std::cout << "valid: level " << spec.level.value() << ", dims " << spec.dims() << ", dynamics";
        for (const auto& d : sdeu::active_dynamics(spec)) std::cout << ' ' << d;
        std::cout << '\n';
        return kExitOk;
    }
    for (const auto& p : problems) std::cout << "invalid: " << p << '\n';
    return kExitConfig;
}

int cmd_sample_spec(std::uint64_t seed, int level, int features, int targets) {
    sdeu::RngStream rng = sdeu::RngStream(seed).derive(sdeu::purpose::spec);
    const auto spec = sdeu::sample_system(sdeu::CurriculumLevel(level), features, targets, rng);
    std::cout << sdeu::to_json(spec).dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic SDE universe: simulation, baselines and distribution-recovery scoring"};
    app.require_subcommand(1);

    ConfigFlags recover_flags;
    auto* recover = app.add_subcommand("recover", "run the zero-shot distribution recovery protocol");
    recover_flags.attach(recover);

    ConfigFlags export_flags;
    std::size_t records = 0;
    auto* exporter = app.add_subcommand("export-stream", "write procedural training records");
    export_flags.attach(exporter);
    exporter->add_option("--records", records, "number of records")->required();

    std::string forecast_file, oracle_file;
    std::size_t score_targets = 0;
    auto* score = app.add_subcommand("score", "score a SampleSet file against an oracle SampleSet file");
    score->add_option("--forecast", forecast_file)->required();
    score->add_option("--oracle", oracle_file)->required();
    score->add_option("--targets", score_targets, "trailing target dimensions, 0 = all");

    std::string spec_file;
    auto* validate = app.add_subcommand("validate-spec", "check a system spec JSON file");
    validate->add_option("--spec", spec_file)->required();

    std::uint64_t sample_seed = 0;
    int sample_level = 7, sample_features = 0, sample_targets = 10;
    auto* sample = app.add_subcommand("sample-spec", "print a sampled system spec as JSON");
    sample->add_option("--seed", sample_seed);
    sample->add_option("--level", sample_level);
    sample->add_option("--features", sample_features);
    sample->add_option("--targets", sample_targets);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*recover) return cmd_recover(recover_flags);
        if (*exporter) return cmd_export(export_flags, records);
        if (*score) return cmd_score(forecast_file, oracle_file, score_targets);
        if (*validate) return cmd_validate_spec(spec_file);
        if (*sample) return cmd_sample_spec(sample_seed, sample_level, sample_features, sample_targets);
    } catch (const sdeu::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sdeu::InvalidLevel& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
