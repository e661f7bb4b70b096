// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Usage: acceptance <path-to-sdeu-cli> <work-dir>

#include "oracles.hpp"
#include "sdeu/error.hpp"
#include "sdeu/harness.hpp"
#include "sdeu/parallel.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace sdeu;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

fs::path g_cli;
fs::path g_work;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SdeSystemSpec one_dim_spec(int level, DriftKind kind, double level_param, double rate, double vol) {
    SdeSystemSpec s;
    s.n_targets = 1;
    s.level = CurriculumLevel(level);
    DriftSpec d;
    d.kind = kind;
    d.level_param = level_param;
    d.rate = rate;
    s.drift = {d};
    s.diffusion.base_vol = {vol};
    s.diffusion.state_scale = {0.0};
    s.diffusion.correlation = CorrelationMatrix::identity(1);
    s.diffusion.chol = cholesky(s.diffusion.correlation.entries);
    s.jumps.intensity = {0.0};
    s.jumps.jump_mean = {0.0};
    s.jumps.jump_std = {0.0};
    s.regimes.drift_offset = {{0.0}, {0.0}};
    s.regimes.logistic_slope = {0.0};
    s.init_state = {0.0};
    return s;
}

void protocol_fidelity(Outcome& o) {
    const ExperimentConfig c;
    o.require(c.n_systems == 200, "200 systems");
    o.require(c.level == 7, "level 7");
    o.require(c.n_targets == 10, "N = 10");
    o.require(c.n_features == 0, "M = 0");
    o.require(c.history_steps == 504, "T = 504");
    o.require(c.t_in == 2.0, "t_in = 2.0");
    o.require(c.horizon == 63, "H = 63");
    o.require(c.t_out == 0.25, "t_out = 0.25");
    o.require(c.n_oracle_paths == 1000, "1000 oracle paths");
    o.require(c.n_forecast_paths == 1000, "1000 forecast paths");
    o.require(to_json(c).dump() == to_json(config_from_json(to_json(c))).dump(), "config snapshot round-trip");
    o.detail << "defaults " << to_json(c).dump();
}

void recovery_ranking(Outcome& o) {
    ExperimentConfig c;
    c.n_systems = 20;
    c.n_oracle_paths = 500;
    c.n_forecast_paths = 500;
    c.write_plots = false;
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_recovery(c, false);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto find = [&](const std::string& f, const std::string& h) {
        for (const auto& r : result.summary)
            if (r.forecaster_id == f && r.horizon == h) return r;
        throw std::runtime_error("missing summary row " + f + "/" + h);
    };
    const auto oracle = find("oracle_rebranch", "avg");
    const auto hs = find("historical_simulation", "avg");
    const auto dcc = find("dcc_garch", "avg");
    const double margin1 = find("historical_simulation", "1").energy - find("oracle_rebranch", "1").energy;
    const double margin63 = find("historical_simulation", "63").energy - find("oracle_rebranch", "63").energy;
    o.require(result.n_failed == 0, "no failed systems");
    o.require(oracle.energy < hs.energy, "oracle < historical_simulation");
    o.require(oracle.energy < dcc.energy, "oracle < dcc_garch");
    o.require(margin63 > margin1, "historical margin grows from h=1 to h=63");
    o.require(seconds <= 600.0, "runtime <= 10 min");
    o.detail << "mean energy oracle=" << oracle.energy << " hist=" << hs.energy << " dcc=" << dcc.energy
             << "; hist margin h1=" << margin1 << " h63=" << margin63 << "; " << seconds << " s on "
             << resolve_threads(0) << " thread(s)";
}

void analytic_sde(Outcome& o) {
    {
        auto spec = one_dim_spec(0, DriftKind::linear_mean_reversion, 0.0, 1.0, 0.0);
        spec.init_state = {1.0};
        const auto path = simulate_history(spec, 10001, 1.0001, RngStream(1));
        const double err = std::abs(path.at(10000, 0) - std::exp(-1.0));
        o.require(err < 1e-3, "exp(-t) within 1e-3");
        o.detail << "|x(1)-e^-1|=" << err << "; ";
    }
    {
        auto spec = one_dim_spec(1, DriftKind::linear_mean_reversion, 1.0, 2.0, 0.5);
        spec.init_state = {1.0};
        const auto path = simulate_history(spec, 400000, 4000.0, RngStream(2));
        std::vector<double> tail(path.values.begin() + 1000, path.values.end());
        const double v = oracle::variance(tail);
        o.require(std::abs(v / 0.0625 - 1.0) < 0.15, "OU variance within 15%");
        o.detail << "OU var=" << v << " (0.0625); ";
    }
    {
        auto spec = one_dim_spec(5, DriftKind::constant, 0.0, 0.0, 0.0);
        spec.jumps.enabled = true;
        spec.jumps.intensity = {4.0};
        spec.jumps.jump_mean = {1.0};
        const std::size_t n = 10000;
        const auto set = branch_futures(spec, Vector::Zero(1), 0, 0.0, n, 1000, 1.0, RngStream(3));
        std::vector<double> counts(n);
        for (std::size_t s = 0; s < n; ++s) counts[s] = set.at(s, 999, 0);
        const double m = oracle::mean(counts);
        o.require(std::abs(m - 4.0) < 4.0 * std::sqrt(4.0 / n), "Poisson mean within 4 sqrt(lambda/n)");
        o.detail << "jump count mean=" << m << "; ";
    }
    {
        auto spec = one_dim_spec(6, DriftKind::linear_mean_reversion, 0.0, 1.0, 0.1);
        spec.regimes.enabled = true;
        spec.regimes.telegraph_rates = {1.0, 3.0};
        const auto path = simulate_history(spec, 1000000, 10000.0, RngStream(4));
        double ones = 0;
        for (auto r : *path.regime_trace) ones += r;
        const double occ = ones / static_cast<double>(path.n_steps);
        o.require(std::abs(occ - 0.25) < 0.02, "telegraph occupancy within 2%");
        o.detail << "regime-1 occupancy=" << occ << " (0.25)";
    }
}

void scoring_oracles(Outcome& o) {
    SampleMatrix a(1, 1), b(1, 1);
    a << 0.0;
    b << 2.0;
    o.require(energy_distance(a, b) == 4.0, "energy({0},{2}) = 4");
    RngStream rng(5);
    SampleMatrix x(500, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    o.require(energy_distance(x, x) == 0.0 && marginal_energy(x, x) == 0.0, "identical sets score 0");
    SampleSet set(100, 4, 3, 0.1);
    for (auto& v : set.values) v = rng.normal();
    const auto self = score_forecast(set, set, 3);
    o.require(self.avg_energy == 0.0 && self.avg_marginal_energy == 0.0, "identical SampleSets score 0");
    const std::vector<double> two{0.0, 2.0};
    o.require(crps_empirical(two, 1.0) == 0.5, "crps({0,2},1) = 0.5");
    std::vector<double> g(100000);
    for (auto& v : g) v = rng.normal();
    const double c = crps_empirical(g, 0.0);
    o.require(std::abs(c - 0.23370) <= 0.003, "Gaussian CRPS at the mean");
    int matches = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> p(1 + rng.below(80)), q(1 + rng.below(80));
        for (auto& v : p) v = rng.below(3) == 0 ? static_cast<double>(rng.below(4)) : rng.normal();
        for (auto& v : q) v = rng.normal() * 2.0;
        SampleMatrix pm(static_cast<Eigen::Index>(p.size()), 1), qm(static_cast<Eigen::Index>(q.size()), 1);
        for (std::size_t i = 0; i < p.size(); ++i) pm(static_cast<Eigen::Index>(i), 0) = p[i];
        for (std::size_t i = 0; i < q.size(); ++i) qm(static_cast<Eigen::Index>(i), 0) = q[i];
        const double y = rng.normal();
        matches += energy_distance(pm, qm) == oracle::energy_1d_quadratic(p, q) &&
                   marginal_energy(pm, qm) == oracle::energy_1d_quadratic(p, q) &&
                   crps_empirical(p, y) == oracle::crps_quadratic(p, y);
    }
    o.require(matches == 100, "fast 1-D paths bit-identical to quadratic reference");
    o.detail << "Gaussian CRPS=" << c << "; bit-exact 1-D cases " << matches << "/100";
}

void head_reductions(Outcome& o) {
    GmmParams g;
    g.weights = {1.0};
    g.means = Matrix::Zero(1, 2);
    g.scale_chols = {Matrix::Identity(2, 2)};
    const double lg = gmm_log_density(g, Vector::Zero(2));
    o.require(std::abs(lg + std::log(2.0 * std::numbers::pi)) < 1e-12, "GMM K=1 at 0 = -log 2pi");

    RngStream rng(6);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(4));
        Matrix l = Matrix::Zero(d, d);
        Vector mu(d), x(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            l(i, i) = 0.3 + rng.uniform();
            for (Eigen::Index j = 0; j < i; ++j) l(i, j) = 0.5 * rng.normal();
            mu(i) = rng.normal();
            x(i) = mu(i) + 2.0 * rng.normal();
        }
        SkewTParams p;
        p.weights = {1.0};
        p.dof = {2.2 + 20.0 * rng.uniform()};
        p.locations = mu.transpose();
        p.scale_chols = {l};
        p.skews = Matrix::Zero(1, d);
        worst = std::max(worst, std::abs(skewt_log_density(p, x) -
                                         oracle::mvt_log_density(x, mu, l * l.transpose(), p.dof[0])));
    }
    o.require(worst < 1e-10, "alpha = 0 matches symmetric t");

    Matrix l(2, 2);
    l << 1.0, 0.0, 0.6, 0.8;
    SkewTParams p;
    p.weights = {1.0};
    p.dof = {1e6};
    p.locations = Matrix(1, 2);
    p.locations << 1.0, -2.0;
    p.scale_chols = {l};
    p.skews = Matrix::Zero(1, 2);
    const std::size_t n = 100000;
    const auto s = skewt_sample(p, n, rng);
    std::vector<double> c0(n), c1(n);
    for (std::size_t i = 0; i < n; ++i) {
        c0[i] = s(static_cast<Eigen::Index>(i), 0);
        c1[i] = s(static_cast<Eigen::Index>(i), 1);
    }
    const double tol = 4.0 / std::sqrt(double(n));
    const bool moments = std::abs(oracle::mean(c0) - 1.0) < tol && std::abs(oracle::mean(c1) + 2.0) < tol &&
                         std::abs(oracle::variance(c0) - 1.0) < 4.0 * std::sqrt(2.0 / n) &&
                         std::abs(oracle::variance(c1) - 1.0) < 4.0 * std::sqrt(2.0 / n) &&
                         std::abs(oracle::correlation(c0, c1) - 0.6) < 4.0 * (1 - 0.36) / std::sqrt(double(n));
    o.require(moments, "Gaussian-limit moments");
    o.detail << "GMM err=" << std::abs(lg + std::log(2.0 * std::numbers::pi)) << "; max |skew-t - t|=" << worst
             << "; limit corr=" << oracle::correlation(c0, c1);
}

void baseline_consistency(Outcome& o) {
    RngStream rng(7);
    std::vector<double> r(20000);
    double h = 0.1 / 0.05;
    for (auto& v : r) {
        v = std::sqrt(h) * rng.normal();
        h = 0.1 + 0.05 * v * v + 0.9 * h;
    }
    const auto gp = fit_garch11(r);
    o.require(std::abs(gp.omega - 0.1) < 0.05 && std::abs(gp.alpha - 0.05) < 0.03 && std::abs(gp.beta - 0.9) < 0.05,
              "GARCH recovery");
    o.detail << "GARCH (" << gp.omega << ", " << gp.alpha << ", " << gp.beta << "); ";

    PathMatrix path;
    path.dims = 2;
    path.n_steps = 5001;
    path.dt = 0.01;
    path.values.assign(path.n_steps * 2, 0.0);
    for (std::size_t t = 1; t < path.n_steps; ++t) {
        const double common = rng.normal();
        path.values[t * 2] = path.values[(t - 1) * 2] + 0.5 * (std::sqrt(0.6) * common + std::sqrt(0.4) * rng.normal());
        path.values[t * 2 + 1] = path.values[(t - 1) * 2 + 1] + 0.5 * (std::sqrt(0.6) * common + std::sqrt(0.4) * rng.normal());
    }
    const auto dcc = fit_dcc(path);
    const double rho = dcc.unconditional_corr.entries(0, 1);
    o.require(std::abs(rho - 0.6) < 0.05, "DCC unconditional correlation");
    o.detail << "DCC rho=" << rho << "; ";

    PathMatrix line;
    line.dims = 2;
    line.n_steps = 50;
    line.dt = 0.1;
    for (std::size_t t = 0; t < 50; ++t) {
        line.values.push_back(0.25 * static_cast<double>(t));
        line.values.push_back(1.0 - 0.5 * static_cast<double>(t));
    }
    const auto a = historical_simulation(line, 200, 20, RngStream(8));
    const auto b = historical_simulation(line, 200, 20, RngStream(9));
    bool same = true;
    for (std::size_t s = 0; s < 200; ++s)
        for (std::size_t k = 0; k < 20; ++k)
            for (std::size_t d = 0; d < 2; ++d) same = same && a.at(s, k, d) == a.at(0, k, d) && a.at(s, k, d) == b.at(s, k, d);
    o.require(same, "constant-increment bootstrap deterministic");
    o.detail << "constant-increment bootstrap identical across paths and seeds: " << (same ? "yes" : "no");
}

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli.string() + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Outcome& o) {
    if (g_cli.empty()) throw std::runtime_error("CLI path not given");
    const std::string common = "recover --seed 2024 --systems 6 --oracle-paths 200 --forecast-paths 200 --no-plots";
    const std::vector<std::pair<std::string, std::string>> runs{
        {"t1_a", "--threads 1"}, {"t1_b", "--threads 1"}, {"t8_a", "--threads 8"}, {"t8_b", "--threads 8"}};
    for (const auto& [dir, threads] : runs) {
        fs::remove_all(g_work / dir);
        const int code = run_cli(common + " " + threads + " --out \"" + (g_work / dir).string() + "\"");
        o.require(code == 0, "recover exit code 0 (" + dir + ")");
    }
    for (const char* f : {"scores.csv", "summary.csv", "fit_status.csv", "failures.csv"}) {
        const std::string ref = slurp(g_work / "t1_a" / f);
        o.require(!ref.empty(), std::string(f) + " written");
        for (const char* other : {"t1_b", "t8_a", "t8_b"})
            o.require(slurp(g_work / other / f) == ref, std::string(f) + " identical in " + other);
    }
    o.detail << "4 CLI runs (threads 1,1,8,8), CSVs byte-identical: " << (o.pass ? "yes" : "no");
}

void format_round_trips(Outcome& o) {
    RngStream rng(10);
    int spec_ok = 0, set_ok = 0, record_ok = 0;
    Bytes stream;
    std::vector<TrainingRecord> records;
    for (int i = 0; i < 200; ++i) {
        RngStream srng = rng.derive(static_cast<std::uint64_t>(i));
        const auto spec = sample_system(CurriculumLevel(static_cast<int>(srng.below(8))),
                                        static_cast<int>(srng.below(3)), 1 + static_cast<int>(srng.below(5)), srng);
        const Json j = to_json(spec);
        spec_ok += to_json(spec_from_json(parse_json(j.dump()))) == j;

        SampleSet set(1 + srng.below(10), 1 + srng.below(10), 1 + srng.below(5), srng.uniform());
        for (auto& v : set.values) v = srng.normal() * std::exp(30.0 * srng.normal());
        const auto back = decode_sample_set(encode_frame(set));
        set_ok += back == set && std::memcmp(back.values.data(), set.values.data(), 8 * set.values.size()) == 0;

        TrainingRecord r;
        r.system_spec = spec;
        r.history = simulate_history(spec, 60, 0.24, srng.derive(1));
        const Vector origin = Eigen::Map<const Vector>(r.history.row(59), static_cast<Eigen::Index>(r.history.dims));
        r.future_branches = branch_futures(spec, origin, 0, r.history.terminal_time(), 4, 5, 0.02, srng.derive(2));
        const Bytes enc = encode_record(r);
        stream.insert(stream.end(), enc.begin(), enc.end());
        records.push_back(std::move(r));
    }
    const auto decoded = decode_records(stream);
    if (decoded.size() == records.size()) {
        for (std::size_t i = 0; i < decoded.size(); ++i) {
            record_ok += to_json(decoded[i].system_spec) == to_json(records[i].system_spec) &&
                         decoded[i].history == records[i].history &&
                         decoded[i].future_branches == records[i].future_branches &&
                         encode_record(decoded[i]) == encode_record(records[i]);
        }
    }
    o.require(spec_ok == 200, "spec JSON");
    o.require(set_ok == 200, "SampleSet binary");
    o.require(record_ok == 200, "TrainingRecord stream");
    o.detail << "spec " << spec_ok << "/200, SampleSet " << set_ok << "/200, records " << record_ok << "/200";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    g_work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "sdeu_acceptance";
    fs::create_directories(g_work);

    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"1 protocol fidelity", protocol_fidelity},
        {"2 recovery ranking and horizon degradation", recovery_ranking},
        {"3 analytic SDE checks", analytic_sde},
        {"4 scoring oracles", scoring_oracles},
        {"5 head reductions", head_reductions},
        {"6 baseline self-consistency", baseline_consistency},
        {"7 determinism and parallel safety", determinism},
        {"8 format round-trips", format_round_trips},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << " :: " << o.detail.str() << std::endl;
        failures += !o.pass;
    }
    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
