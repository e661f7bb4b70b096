#include "sdeu/harness.hpp"

#include "sdeu/error.hpp"
#include "sdeu/exact_sum.hpp"
#include "sdeu/format.hpp"
#include "sdeu/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <array>
#include <set>

namespace sdeu {
namespace {

constexpr std::uint64_t kRecoveryTag = 0x52454356;  // "RECV"
constexpr std::uint64_t kExportTag = 0x45585054;    // "EXPT"

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + '"';
}

std::string format_or_empty(double v) { return std::isfinite(v) ? format_double(v) : std::string{}; }

bool is_baseline(Forecaster f) { return f != Forecaster::oracle_rebranch; }

Vector terminal_state(const PathMatrix& history) {
    const double* row = history.row(history.n_steps - 1);
    return Eigen::Map<const Vector>(row, static_cast<Eigen::Index>(history.dims));
}

int terminal_regime(const PathMatrix& history) {
    return history.regime_trace ? history.regime_trace->back() : 0;
}

SystemOutcome run_system(const ExperimentConfig& cfg, std::size_t index) {
    SystemOutcome out;
    out.index = index;
    out.system_id = system_id(index);
    const auto start = std::chrono::steady_clock::now();
    const char* stage = "spec";
    try {
        const RngStream sys = system_stream(cfg.root_seed, index);
        RngStream spec_rng = sys.derive(purpose::spec);
        const SdeSystemSpec spec = sample_system(CurriculumLevel(cfg.level), cfg.n_features, cfg.n_targets, spec_rng);
        stage = "history";
        const PathMatrix history =
            simulate_history(spec, cfg.history_steps, cfg.t_in, sys.derive(purpose::history), cfg.burn_in_steps);
        const Vector origin = terminal_state(history);
        const int regime = terminal_regime(history);
        const double origin_time = history.terminal_time();

        stage = "oracle";
        const SampleSet oracle = branch_futures(spec, origin, regime, origin_time, cfg.n_oracle_paths, cfg.horizon,
                                                cfg.t_out, sys.derive(purpose::oracle));
        const PreparedOracle prepared(oracle, static_cast<std::size_t>(cfg.n_targets));

        for (Forecaster f : cfg.forecasters) {
            stage = to_string(f);
            SampleSet forecast;
            switch (f) {
                case Forecaster::oracle_rebranch:
                    forecast = branch_futures(spec, origin, regime, origin_time, cfg.n_forecast_paths, cfg.horizon,
                                              cfg.t_out, sys.derive(purpose::rebranch));
                    break;
                case Forecaster::historical_simulation:
                    forecast = historical_simulation(history, cfg.n_forecast_paths, cfg.horizon,
                                                     sys.derive(purpose::historical));
                    break;
                case Forecaster::dcc_garch: {
                    const DccParams params = fit_dcc(history);
                    for (std::size_t d = 0; d < params.series_status.size(); ++d) {
                        const FitStatus& st = params.series_status[d];
                        out.fit_rows.push_back(out.system_id + ",dcc_garch,garch_" + std::to_string(d) + "," +
                                               (st.fallback ? "fallback" : "ok") + "," + csv_quote(st.reason));
                    }
                    const FitStatus& cs = params.correlation_status;
                    out.fit_rows.push_back(out.system_id + ",dcc_garch,correlation," +
                                           (cs.fallback ? "fallback" : "ok") + "," + csv_quote(cs.reason));
                    out.any_fallback = out.any_fallback || params.any_fallback();
                    forecast = dcc_forecast(params, history, cfg.n_forecast_paths, cfg.horizon,
                                            sys.derive(purpose::dcc));
                    break;
                }
            }
            out.reports.push_back(score_forecast(forecast, prepared, to_string(f), out.system_id));
        }
    } catch (const std::exception& e) {
        out.failed = true;
        out.error = std::string(stage) + ": " + e.what();
        out.reports.clear();
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_outputs_to(const ExperimentConfig& cfg, const RecoveryResult& result) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());

    std::ostringstream scores;
    scores << kScoreCsvHeader << '\n';
    for (const auto& sys : result.systems) {
        for (const auto& r : sys.reports) write_score_rows(scores, r);
    }
    write_text(cfg.output_dir / "scores.csv", scores.str());

    std::ostringstream summary;
    summary << "forecaster_id,horizon,energy,marginal_energy,crps_sum,energy_gap_pct,marginal_energy_gap_pct,"
               "crps_sum_gap_pct\n";
    for (const auto& row : result.summary) {
        summary << row.forecaster_id << ',' << row.horizon << ',' << format_or_empty(row.energy) << ','
                << format_or_empty(row.marginal_energy) << ',' << format_or_empty(row.crps_sum) << ','
                << format_or_empty(row.energy_gap_pct) << ',' << format_or_empty(row.marginal_energy_gap_pct)
                << ',' << format_or_empty(row.crps_sum_gap_pct) << '\n';
    }
    write_text(cfg.output_dir / "summary.csv", summary.str());

    std::ostringstream fits;
    fits << "system_id,forecaster_id,component,status,reason\n";
    for (const auto& sys : result.systems) {
        for (const auto& row : sys.fit_rows) fits << row << '\n';
    }
    write_text(cfg.output_dir / "fit_status.csv", fits.str());

    std::ostringstream failures;
    failures << "system_id,error\n";
    for (const auto& sys : result.systems) {
        if (sys.failed) failures << sys.system_id << ',' << csv_quote(sys.error) << '\n';
    }
    write_text(cfg.output_dir / "failures.csv", failures.str());

    // Wall-clock is the one non-deterministic output; it stays out of the CSVs.
    Json timings = Json::array();
    for (const auto& sys : result.systems) {
        timings.push_back({{"system_id", sys.system_id}, {"seconds", sys.seconds}, {"failed", sys.failed}});
    }
    write_text(cfg.output_dir / "timings.json",
               Json{{"n_systems", result.systems.size()}, {"n_failed", result.n_failed}, {"systems", timings}}
                   .dump(2));

    if (!cfg.write_plots) return;
    const std::array<std::pair<const char*, double SummaryRow::*>, 3> metrics{
        {{"energy", &SummaryRow::energy},
         {"marginal_energy", &SummaryRow::marginal_energy},
         {"crps_sum", &SummaryRow::crps_sum}}};
    for (const auto& [name, member] : metrics) {
        try {
            std::vector<std::string> names;
            std::vector<std::vector<double>> series;
            for (Forecaster f : cfg.forecasters) {
                names.emplace_back(to_string(f));
                std::vector<double> ys;
                for (const auto& row : result.summary) {
                    if (row.forecaster_id == to_string(f) && row.horizon != "avg") ys.push_back(row.*member);
                }
                series.push_back(std::move(ys));
            }
            write_text(cfg.output_dir / (std::string(name) + ".svg"), render_metric_svg(name, names, series));
        } catch (const std::exception& e) {
            std::cerr << "warning: plot " << name << " not written: " << e.what() << '\n';
        }
    }
}

}  // namespace

const char* to_string(Forecaster f) {
    switch (f) {
        case Forecaster::oracle_rebranch: return "oracle_rebranch";
        case Forecaster::historical_simulation: return "historical_simulation";
        case Forecaster::dcc_garch: return "dcc_garch";
    }
    return "?";
}

Forecaster forecaster_from_string(const std::string& name) {
    for (Forecaster f : {Forecaster::oracle_rebranch, Forecaster::historical_simulation, Forecaster::dcc_garch}) {
        if (name == to_string(f)) return f;
    }
    throw ConfigError("unknown forecaster '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (n_systems < 1) throw ConfigError("n_systems must be >= 1");
    if (level < 0 || level > CurriculumLevel::kMax) throw ConfigError("level must lie in 0..7");
    if (n_targets < 1) throw ConfigError("n_targets must be >= 1");
    if (n_features < 0) throw ConfigError("n_features must be >= 0");
    if (history_steps < 2) throw ConfigError("T must be >= 2");
    if (!(t_in > 0.0) || !std::isfinite(t_in)) throw ConfigError("t_in must be > 0");
    if (horizon < 1) throw ConfigError("H must be >= 1");
    if (!(t_out > 0.0) || !std::isfinite(t_out)) throw ConfigError("t_out must be > 0");
    if (n_oracle_paths < 1 || n_forecast_paths < 1) throw ConfigError("path counts must be >= 1");
    if (forecasters.empty()) throw ConfigError("at least one forecaster required");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
        throw ConfigError("max_failure_fraction must lie in [0, 1]");
    }
}

Json to_json(const ExperimentConfig& c) {
    Json roster = Json::array();
    for (Forecaster f : c.forecasters) roster.push_back(to_string(f));
    return {{"root_seed", c.root_seed},
            {"n_systems", c.n_systems},
            {"level", c.level},
            {"n_features", c.n_features},
            {"n_targets", c.n_targets},
            {"T", c.history_steps},
            {"t_in", c.t_in},
            {"H", c.horizon},
            {"t_out", c.t_out},
            {"n_oracle_paths", c.n_oracle_paths},
            {"n_forecast_paths", c.n_forecast_paths},
            {"forecasters", roster},
            {"output_dir", c.output_dir.string()},
            {"thread_count", c.thread_count},
            {"burn_in_steps", c.burn_in_steps},
            {"strict", c.strict},
            {"max_failure_fraction", c.max_failure_fraction},
            {"write_plots", c.write_plots}};
}

ExperimentConfig config_from_json(const Json& j, ExperimentConfig c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto read = [&](const char* key, auto& target) {
        if (!j.contains(key)) return;
        try {
            target = j.at(key).get<std::remove_reference_t<decltype(target)>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    };
    static const std::set<std::string> known{"root_seed", "n_systems", "level", "n_features", "n_targets", "T",
                                             "t_in", "H", "t_out", "n_oracle_paths", "n_forecast_paths",
                                             "forecasters", "output_dir", "thread_count", "burn_in_steps",
                                             "strict", "max_failure_fraction", "write_plots"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    read("root_seed", c.root_seed);
    read("n_systems", c.n_systems);
    read("level", c.level);
    read("n_features", c.n_features);
    read("n_targets", c.n_targets);
    read("T", c.history_steps);
    read("t_in", c.t_in);
    read("H", c.horizon);
    read("t_out", c.t_out);
    read("n_oracle_paths", c.n_oracle_paths);
    read("n_forecast_paths", c.n_forecast_paths);
    read("thread_count", c.thread_count);
    read("burn_in_steps", c.burn_in_steps);
    read("strict", c.strict);
    read("max_failure_fraction", c.max_failure_fraction);
    read("write_plots", c.write_plots);
    if (j.contains("output_dir")) {
        std::string dir;
        read("output_dir", dir);
        c.output_dir = dir;
    }
    if (j.contains("forecasters")) {
        std::vector<std::string> names;
        read("forecasters", names);
        c.forecasters.clear();
        for (const auto& n : names) c.forecasters.push_back(forecaster_from_string(n));
    }
    return c;
}

std::string system_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sys%04zu", index);
    return buf;
}

RngStream system_stream(std::uint64_t root_seed, std::size_t index) {
    return RngStream(root_seed).derive(kRecoveryTag).derive(index);
}

std::vector<SummaryRow> summarize(const std::vector<SystemOutcome>& systems, const std::vector<Forecaster>& roster,
                                  std::size_t horizon, bool strict, std::size_t* n_aggregated) {
    std::vector<const SystemOutcome*> used;
    for (const auto& s : systems) {
        if (s.failed || (strict && s.any_fallback)) continue;
        used.push_back(&s);
    }
    if (n_aggregated) *n_aggregated = used.size();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    // means[f][h][metric], h == horizon is the "avg" row
    std::vector<std::vector<std::array<double, 3>>> means(roster.size(),
                                                         std::vector<std::array<double, 3>>(horizon + 1));
    for (std::size_t f = 0; f < roster.size(); ++f) {
        for (std::size_t h = 0; h <= horizon; ++h) {
            std::array<ExactSum, 3> acc;
            for (const SystemOutcome* s : used) {
                const ScoreReport& r = s->reports[f];
                if (h < horizon) {
                    acc[0].add(r.per_horizon_energy[h]);
                    acc[1].add(r.per_horizon_marginal_energy[h]);
                    acc[2].add(r.per_horizon_crps_sum[h]);
                } else {
                    acc[0].add(r.avg_energy);
                    acc[1].add(r.avg_marginal_energy);
                    acc[2].add(r.avg_crps_sum);
                }
            }
            for (int m = 0; m < 3; ++m) {
                means[f][h][m] = used.empty() ? nan : acc[m].result() / static_cast<double>(used.size());
            }
        }
    }

    std::vector<SummaryRow> rows;
    for (std::size_t f = 0; f < roster.size(); ++f) {
        for (std::size_t h = 0; h <= horizon; ++h) {
            SummaryRow row;
            row.forecaster_id = to_string(roster[f]);
            row.horizon = h < horizon ? std::to_string(h + 1) : "avg";
            row.energy = means[f][h][0];
            row.marginal_energy = means[f][h][1];
            row.crps_sum = means[f][h][2];
            std::array<double, 3> best{nan, nan, nan};
            for (std::size_t g = 0; g < roster.size(); ++g) {
                if (!is_baseline(roster[g])) continue;
                for (int m = 0; m < 3; ++m) {
                    if (std::isnan(best[m]) || means[g][h][m] < best[m]) best[m] = means[g][h][m];
                }
            }
            auto gap = [](double v, double b) { return b > 0.0 ? 100.0 * (v - b) / b : std::numeric_limits<double>::quiet_NaN(); };
            row.energy_gap_pct = gap(row.energy, best[0]);
            row.marginal_energy_gap_pct = gap(row.marginal_energy, best[1]);
            row.crps_sum_gap_pct = gap(row.crps_sum, best[2]);
            rows.push_back(row);
        }
    }
    return rows;
}

RecoveryResult run_recovery(const ExperimentConfig& config, bool write_outputs) {
    config.validate();
    RecoveryResult result;
    result.systems.resize(config.n_systems);
    parallel_for(config.n_systems, config.thread_count,
                 [&](std::size_t i) { result.systems[i] = run_system(config, i); });
    for (const auto& s : result.systems) {
        if (s.failed) ++result.n_failed;
    }
    result.summary = summarize(result.systems, config.forecasters, config.horizon, config.strict, &result.n_aggregated);
    if (write_outputs) write_outputs_to(config, result);
    return result;
}

TrainingRecord make_training_record(const ExperimentConfig& cfg, std::size_t index) {
    const RngStream rec = RngStream(cfg.root_seed).derive(kExportTag).derive(index);
    RngStream spec_rng = rec.derive(purpose::spec);
    TrainingRecord out;
    out.system_spec = sample_system(CurriculumLevel(cfg.level), cfg.n_features, cfg.n_targets, spec_rng);
    out.history = simulate_history(out.system_spec, cfg.history_steps, cfg.t_in, rec.derive(purpose::history),
                                   cfg.burn_in_steps);
    out.future_branches =
        branch_futures(out.system_spec, terminal_state(out.history), terminal_regime(out.history),
                       out.history.terminal_time(), cfg.n_oracle_paths, cfg.horizon, cfg.t_out,
                       rec.derive(purpose::oracle));
    return out;
}

std::size_t export_training_stream(const ExperimentConfig& config, std::size_t n_records,
                                   const std::filesystem::path& sink) {
    config.validate();
    std::ofstream out(sink, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + sink.string() + " for writing");
    const std::size_t batch = std::max<std::size_t>(1, 4 * resolve_threads(config.thread_count));
    std::size_t written = 0;
    for (std::size_t first = 0; first < n_records; first += batch) {
        const std::size_t count = std::min(batch, n_records - first);
        std::vector<Bytes> encoded(count);
        parallel_for(count, config.thread_count,
                     [&](std::size_t k) { encoded[k] = encode_record(make_training_record(config, first + k)); });
        for (const Bytes& b : encoded) {
            out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
            if (!out) throw IoError("write failed for " + sink.string());
            ++written;
        }
    }
    return written;
}

ScoreReport score_external(const std::filesystem::path& forecast_file, const std::filesystem::path& oracle_file,
                           std::size_t n_targets) {
    const SampleSet forecast = decode_sample_set(read_file(forecast_file));
    const SampleSet oracle = decode_sample_set(read_file(oracle_file));
    if (forecast.horizon != oracle.horizon || forecast.dims != oracle.dims) {
        throw DimensionMismatch("forecast is " + std::to_string(forecast.horizon) + "x" +
                                std::to_string(forecast.dims) + " (H x D), oracle is " +
                                std::to_string(oracle.horizon) + "x" + std::to_string(oracle.dims));
    }
    return score_forecast(forecast, oracle, n_targets, forecast_file.stem().string(), oracle_file.stem().string());
}

std::string render_metric_svg(const std::string& title, const std::vector<std::string>& series_names,
                              const std::vector<std::vector<double>>& series) {
    constexpr double width = 720, height = 420, left = 70, right = 190, top = 40, bottom = 50;
    static const std::array<const char*, 6> colors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    std::size_t n_x = 0;
    for (const auto& s : series) {
        n_x = std::max(n_x, s.size());
        for (double v : s) {
            if (!std::isfinite(v)) continue;
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (!std::isfinite(y_min)) throw InvalidParameter("no finite values to plot");
    y_min = std::min(0.0, y_min);
    if (y_max <= y_min) y_max = y_min + 1.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto px = [&](std::size_t i) { return left + (n_x > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n_x - 1) : 0.0); };
    auto py = [&](double v) { return top + plot_h * (1.0 - (v - y_min) / (y_max - y_min)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = y_min + (y_max - y_min) * k / 4.0;
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << format_double(std::round(v * 1e4) / 1e4)
            << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">forecast horizon</text>\n";
    svg << "<text x=\"" << left << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">1</text>\n";
    svg << "<text x=\"" << left + plot_w << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">" << n_x
        << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % colors.size()];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < series[s].size(); ++i) {
            if (!std::isfinite(series[s][i])) continue;
            svg << px(i) << ',' << py(series[s][i]) << ' ';
        }
        svg << "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(s);
        svg << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 35
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">"
            << (s < series_names.size() ? series_names[s] : std::string{}) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace sdeu
