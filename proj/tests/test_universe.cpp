#include "oracles.hpp"
#include "sdeu/error.hpp"
#include "sdeu/universe.hpp"

#include <doctest.h>

#include <algorithm>

using namespace sdeu;

namespace {
SdeSystemSpec sample(int level, int m, int n, std::uint64_t seed) {
    RngStream rng = RngStream(seed).derive(purpose::spec);
    return sample_system(CurriculumLevel(level), m, n, rng);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}
}  // namespace

TEST_CASE("levels outside 0..7 are rejected") {
    CHECK_THROWS_AS(CurriculumLevel(8), InvalidLevel);
    CHECK_THROWS_AS(CurriculumLevel(9), InvalidLevel);
    CHECK_THROWS_AS(CurriculumLevel(-1), InvalidLevel);
    CHECK(CurriculumLevel(7).value() == 7);
}

TEST_CASE("level 0 has drift only") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto spec = sample(0, 2, 3, seed);
        CHECK_FALSE(spec.jumps.enabled);
        CHECK_FALSE(spec.regimes.enabled);
        CHECK((spec.diffusion.correlation.entries - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
        for (const auto& d : spec.drift) {
            CHECK((d.kind == DriftKind::constant || d.kind == DriftKind::linear_mean_reversion));
            CHECK(d.forcing_amplitude == 0.0);
        }
        CHECK(active_dynamics(spec) == std::set<std::string>{"drift"});
    }
}

TEST_CASE("level 5 always has jumps") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) CHECK(sample(5, 0, 4, seed).jumps.enabled);
}

TEST_CASE("level 7 with ten targets uses logistic regimes") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto spec = sample(7, 0, 10, seed);
        CHECK(spec.dims() == 10);
        CHECK(spec.regimes.enabled);
        CHECK(spec.regimes.mechanism == RegimeMechanism::logistic);
        CHECK(spec.regimes.n_regimes == 2);
    }
}

TEST_CASE("level 6 uses telegraph regimes") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto spec = sample(6, 1, 2, seed);
        CHECK(spec.regimes.enabled);
        CHECK(spec.regimes.mechanism == RegimeMechanism::telegraph);
    }
}

TEST_CASE("sampled specs validate and respect ranges") {
    for (int level = 0; level <= 7; ++level) {
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            const int m = static_cast<int>(seed % 3);
            const auto spec = sample(level, m, 1 + static_cast<int>(seed % 5), seed);
            const auto problems = validate_spec(spec);
            REQUIRE_MESSAGE(problems.empty(), "level " << level << " seed " << seed << ": " << problems.front());
            for (std::size_t i = 0; i < spec.drift.size(); ++i) {
                const auto& d = spec.drift[i];
                REQUIRE(d.level_param >= ranges::level_lo);
                REQUIRE(d.level_param <= ranges::level_hi);
                if (d.kind != DriftKind::constant) {
                    REQUIRE(d.rate >= ranges::rate_lo);
                    REQUIRE(d.rate <= ranges::rate_hi);
                }
                REQUIRE(d.forcing_amplitude <= ranges::forcing_amp_fraction * spec.diffusion.base_vol[i] + 1e-15);
                REQUIRE(d.forcing_phase >= 0.0);
                REQUIRE(d.forcing_phase < 2.0 * std::numbers::pi);
                REQUIRE(spec.init_state[i] >= ranges::init_lo);
                REQUIRE(spec.init_state[i] <= ranges::init_hi);
                if (level >= 1) {
                    REQUIRE(spec.diffusion.base_vol[i] >= ranges::vol_lo);
                    REQUIRE(spec.diffusion.base_vol[i] <= ranges::vol_hi);
                }
            }
            REQUIRE(oracle::jacobi_eigenvalues(spec.diffusion.correlation.entries).front() >= kPdFloor * (1 - 1e-6));
            if (spec.jumps.enabled) {
                for (std::size_t i = 0; i < spec.jumps.intensity.size(); ++i) {
                    REQUIRE(spec.jumps.intensity[i] >= ranges::jump_intensity_lo);
                    REQUIRE(spec.jumps.intensity[i] <= ranges::jump_intensity_hi);
                    REQUIRE(spec.jumps.jump_std[i] >= ranges::jump_std_lo);
                    REQUIRE(spec.jumps.jump_std[i] <= ranges::jump_std_hi);
                }
            }
        }
    }
}

TEST_CASE("correlation structure follows the level") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto s1 = sample(1, 2, 3, seed);
        CHECK((s1.diffusion.correlation.entries - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);
        const auto s2 = sample(2, 2, 3, seed);
        CHECK(s2.diffusion.correlation_structure == CorrelationStructure::block);
        CHECK(s2.diffusion.correlation.entries.block(0, 2, 2, 3).cwiseAbs().maxCoeff() == 0.0);
        const auto s3 = sample(3, 2, 3, seed);
        CHECK(s3.diffusion.correlation_structure == CorrelationStructure::cross_block);
        CHECK(sample(4, 2, 3, seed).diffusion.correlation_structure == CorrelationStructure::global);
    }
}

TEST_CASE("level monotonicity of reachable dynamics") {
    std::vector<std::set<std::string>> reachable(8);
    for (int level = 0; level <= 7; ++level) {
        for (std::uint64_t seed = 0; seed < 500; ++seed) {
            const auto d = active_dynamics(sample(level, 1, 2, seed * 31 + static_cast<std::uint64_t>(level)));
            reachable[static_cast<std::size_t>(level)].insert(d.begin(), d.end());
        }
    }
    for (std::size_t k = 1; k < reachable.size(); ++k) {
        CHECK(std::includes(reachable[k].begin(), reachable[k].end(), reachable[k - 1].begin(),
                            reachable[k - 1].end()));
        CHECK(reachable[k].size() > reachable[k - 1].size());
    }
    CHECK(reachable[7].count("state_dependent_regimes") == 1);
    CHECK(reachable[6].count("state_dependent_regimes") == 0);
}

TEST_CASE("older dynamics are mixed in at least half the time") {
    int jumps = 0, nonlinear = 0, forcing = 0, global = 0;
    const int n = 2000;
    for (int seed = 0; seed < n; ++seed) {
        const auto d = active_dynamics(sample(7, 0, 4, static_cast<std::uint64_t>(seed)));
        jumps += d.count("jumps");
        nonlinear += d.count("nonlinear_drift");
        forcing += d.count("forcing");
        global += d.count("global_correlation");
    }
    const double lo = 0.5 - 4.0 * std::sqrt(0.25 / n);
    CHECK(jumps / double(n) > lo);
    CHECK(nonlinear / double(n) > lo);
    CHECK(forcing / double(n) > lo);
    CHECK(global / double(n) > lo);
    CHECK(jumps < n);
}

TEST_CASE("with no features levels 2 and 3 share the correlation law") {
    const int n = 400;
    std::vector<double> r2, r3;
    for (int seed = 0; seed < n; ++seed) {
        r2.push_back(sample(2, 0, 3, static_cast<std::uint64_t>(seed)).diffusion.correlation.entries(0, 1));
        r3.push_back(sample(3, 0, 3, static_cast<std::uint64_t>(seed) + 100000).diffusion.correlation.entries(0, 1));
    }
    CHECK(std::abs(oracle::mean(r2) - oracle::mean(r3)) < 4.0 * std::sqrt((oracle::variance(r2) + oracle::variance(r3)) / n));
    CHECK(oracle::variance(r2) == doctest::Approx(oracle::variance(r3)).epsilon(0.25));
}

TEST_CASE("sample_system is deterministic") {
    const auto a = sample(7, 2, 5, 42);
    const auto b = sample(7, 2, 5, 42);
    CHECK(a.init_state == b.init_state);
    CHECK(a.diffusion.correlation.entries == b.diffusion.correlation.entries);
    CHECK(a.regimes.logistic_slope == b.regimes.logistic_slope);
    CHECK(a.jumps.intensity == b.jumps.intensity);
}

TEST_CASE("validate_spec reports specific violations") {
    auto spec = sample(3, 0, 3, 1);
    REQUIRE(validate_spec(spec).empty());
    spec.jumps.enabled = true;
    spec.jumps.intensity.assign(3, 1.0);
    spec.jumps.jump_mean.assign(3, 0.0);
    spec.jumps.jump_std.assign(3, 0.1);
    CHECK(validate_spec(spec) == std::vector<std::string>{"jumps require level ≥ 5"});

    auto bad = sample(4, 0, 2, 2);
    bad.diffusion.correlation.entries << 1, 2, 2, 1;
    CHECK(contains(validate_spec(bad), "correlation not positive definite"));

    auto regimes = sample(5, 0, 2, 3);
    regimes.regimes.enabled = true;
    CHECK_FALSE(validate_spec(regimes).empty());
}

TEST_CASE("invalid dimensions are rejected") {
    RngStream rng(1);
    CHECK_THROWS_AS(sample_system(CurriculumLevel(2), 0, 0, rng), InvalidParameter);
    CHECK_THROWS_AS(sample_system(CurriculumLevel(2), -1, 2, rng), InvalidParameter);
}

TEST_CASE("drift kinds evaluate their formulas") {
    DriftSpec d;
    d.level_param = 1.0;
    d.rate = 2.0;
    d.kind = DriftKind::constant;
    CHECK(d.value(0.0, 5.0) == 1.0);
    d.kind = DriftKind::linear_mean_reversion;
    CHECK(d.value(0.0, 0.5) == doctest::Approx(1.0));
    d.kind = DriftKind::tanh_saturating;
    CHECK(d.value(0.0, 0.5) == doctest::Approx(2.0 * std::tanh(0.5)));
    d.kind = DriftKind::cubic_damped;
    CHECK(d.value(0.0, 3.0) == doctest::Approx(-2.0 * (2.0 + 8.0)));
    d.kind = DriftKind::constant;
    d.forcing_amplitude = 0.5;
    d.forcing_frequency = 1.0;
    d.forcing_phase = 0.0;
    CHECK(d.value(0.25, 0.0) == doctest::Approx(1.5));
}

TEST_CASE("logistic hazard and telegraph rates") {
    RegimeSpec r;
    r.enabled = true;
    r.mechanism = RegimeMechanism::telegraph;
    r.telegraph_rates = {1.5, 3.0};
    const double x[2] = {0.3, -0.4};
    CHECK(r.switch_rate(0, x, 2) == 1.5);
    CHECK(r.switch_rate(1, x, 2) == 3.0);
    r.mechanism = RegimeMechanism::logistic;
    r.logistic_max_rate = 4.0;
    r.logistic_slope = {1.0, 0.5};
    r.logistic_bias = 0.1;
    const double a = 0.3 - 0.2 + 0.1;
    CHECK(r.switch_rate(0, x, 2) == doctest::Approx(4.0 / (1.0 + std::exp(-a))));
    CHECK(r.switch_rate(1, x, 2) == doctest::Approx(4.0 / (1.0 + std::exp(a))));
}
