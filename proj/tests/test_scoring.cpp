#include "oracles.hpp"
#include "sdeu/error.hpp"
#include "sdeu/scoring.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <sstream>

using namespace sdeu;

namespace {

SampleMatrix gaussian(std::size_t n, Eigen::Index d, RngStream& rng, double rho = 0.0) {
    SampleMatrix m(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double common = rng.normal();
        for (Eigen::Index j = 0; j < d; ++j)
            m(i, j) = std::sqrt(rho) * common + std::sqrt(1.0 - rho) * rng.normal();
    }
    return m;
}

std::vector<double> col(const SampleMatrix& m, Eigen::Index c) {
    std::vector<double> v(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, c);
    return v;
}

SampleMatrix as_matrix(const std::vector<double>& v) {
    SampleMatrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return m;
}

/// Values with frequent ties and mixed magnitudes.
std::vector<double> awkward(std::size_t n, RngStream& rng) {
    std::vector<double> v(n);
    for (auto& x : v) {
        switch (rng.below(4)) {
            case 0: x = static_cast<double>(rng.below(5)); break;
            case 1: x = rng.normal() * 1e-8; break;
            case 2: x = rng.normal() * 1e6; break;
            default: x = rng.normal();
        }
    }
    return v;
}

SampleSet random_set(std::size_t s, std::size_t h, std::size_t d, RngStream& rng) {
    SampleSet set(s, h, d, 0.01);
    for (auto& v : set.values) v = rng.normal();
    return set;
}

double mean_truth_crps(const SampleSet& forecast, const SampleSet& truth, std::size_t h, std::size_t first) {
    std::vector<double> f, g;
    for (std::size_t s = 0; s < forecast.n_samples; ++s) {
        double acc = 0.0;
        for (std::size_t d = first; d < forecast.dims; ++d) acc += forecast.at(s, h, d);
        f.push_back(acc);
    }
    for (std::size_t s = 0; s < truth.n_samples; ++s) {
        double acc = 0.0;
        for (std::size_t d = first; d < truth.dims; ++d) acc += truth.at(s, h, d);
        g.push_back(acc);
    }
    const double n = static_cast<double>(f.size());
    const double self = oracle::pair_abs_sum(f, f) / (2.0 * n * n);
    long double total = 0;
    for (double y : g) {
        const double yy[1] = {y};
        total += oracle::pair_abs_sum(f, yy) / n - self;
    }
    return static_cast<double>(total / g.size());
}

}  // namespace

TEST_CASE("energy distance of two points") {
    SampleMatrix a(1, 1), b(1, 1);
    a << 0.0;
    b << 2.0;
    CHECK(energy_distance(a, b) == 4.0);
    SampleMatrix a2(1, 2), b2(1, 2);
    a2 << 0.0, 0.0;
    b2 << 3.0, 4.0;
    CHECK(energy_distance(a2, b2) == 10.0);
}

TEST_CASE("identical sets score exactly zero") {
    RngStream rng(1);
    for (Eigen::Index d : {1, 2, 5}) {
        const auto a = gaussian(300, d, rng);
        CHECK(energy_distance(a, a) == 0.0);
        CHECK(marginal_energy(a, a) == 0.0);
    }
    const auto set = random_set(200, 4, 3, rng);
    const auto report = score_forecast(set, set, 3);
    for (std::size_t h = 0; h < 4; ++h) {
        CHECK(report.per_horizon_energy[h] == 0.0);
        CHECK(report.per_horizon_marginal_energy[h] == 0.0);
    }
    CHECK(report.avg_energy == 0.0);
    CHECK(report.avg_marginal_energy == 0.0);
}

TEST_CASE("identical degenerate sets score zero on every metric") {
    SampleSet set(50, 3, 2, 0.1);
    for (std::size_t s = 0; s < 50; ++s)
        for (std::size_t h = 0; h < 3; ++h)
            for (std::size_t d = 0; d < 2; ++d) set.at(s, h, d) = 0.5 * static_cast<double>(h) - static_cast<double>(d);
    const auto r = score_forecast(set, set, 2);
    CHECK(r.avg_energy == 0.0);
    CHECK(r.avg_marginal_energy == 0.0);
    CHECK(r.avg_crps_sum == 0.0);
}

TEST_CASE("same-law Gaussian sets are close") {
    RngStream rng(2);
    const auto a = gaussian(2000, 2, rng);
    const auto b = gaussian(2000, 2, rng);
    CHECK(std::abs(energy_distance(a, b)) < 0.01);
    CHECK(energy_distance(a, b) == doctest::Approx(oracle::energy_naive(a, b)).epsilon(1e-9));
}

TEST_CASE("marginal energy reduces to energy in one dimension") {
    RngStream rng(3);
    const auto a = gaussian(400, 1, rng);
    const auto b = gaussian(300, 1, rng);
    CHECK(marginal_energy(a, b) == energy_distance(a, b));
}

TEST_CASE("marginal energy is blind to correlation") {
    RngStream rng(4);
    const auto a = gaussian(2000, 2, rng, 0.9);
    SampleMatrix b = a;
    std::vector<Eigen::Index> perm(2000);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < 2000; ++i) b(i, 1) = a(perm[static_cast<std::size_t>(i)], 1);
    CHECK(marginal_energy(a, b) == 0.0);
    CHECK(energy_distance(a, b) > 0.05);
}

TEST_CASE("CRPS closed forms") {
    const std::vector<double> two{0.0, 2.0};
    CHECK(crps_empirical(two, 1.0) == 0.5);
    const std::vector<double> same(10, 3.0);
    CHECK(crps_empirical(same, 3.0) == 0.0);
    RngStream rng(5);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.normal();
    const double expected = 2.0 / std::sqrt(2.0 * std::numbers::pi) - 1.0 / std::sqrt(std::numbers::pi);
    CHECK(expected == doctest::Approx(0.23370).epsilon(1e-4));
    CHECK(std::abs(crps_empirical(x, 0.0) - expected) < 0.003);
}

TEST_CASE("fast one-dimensional paths match the quadratic reference bit for bit") {
    RngStream rng(6);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = awkward(1 + rng.below(60), rng);
        const auto b = awkward(1 + rng.below(60), rng);
        const double y = trial % 3 == 0 ? a[0] : rng.normal();
        REQUIRE(energy_distance(as_matrix(a), as_matrix(b)) == oracle::energy_1d_quadratic(a, b));
        REQUIRE(crps_empirical(a, y) == oracle::crps_quadratic(a, y));
        std::vector<double> sorted = a;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> sorted_b = b;
        std::sort(sorted_b.begin(), sorted_b.end());
        REQUIRE(detail::sorted_self_abs_sum(sorted) == oracle::pair_abs_sum(a, a));
        REQUIRE(detail::sorted_cross_abs_sum(sorted, sorted_b) == oracle::pair_abs_sum(a, b));
    }
}

TEST_CASE("marginal energy per column matches the quadratic reference") {
    RngStream rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = gaussian(1 + rng.below(80), 3, rng);
        const auto b = gaussian(1 + rng.below(80), 3, rng);
        long double total = 0;
        std::vector<double> per;
        for (Eigen::Index d = 0; d < 3; ++d) per.push_back(oracle::energy_1d_quadratic(col(a, d), col(b, d)));
        for (double p : per) total += p;
        CHECK(marginal_energy(a, b) == doctest::Approx(static_cast<double>(total / 3)).epsilon(1e-14));
    }
}

TEST_CASE("energy distance is exactly symmetric and scale equivariant") {
    RngStream rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = gaussian(50 + rng.below(50), 3, rng);
        const auto b = gaussian(50 + rng.below(50), 3, rng, 0.5);
        const double e = energy_distance(a, b);
        REQUIRE(e == energy_distance(b, a));
        REQUIRE(energy_distance(SampleMatrix(a * 4.0), SampleMatrix(b * 4.0)) == 4.0 * e);
        REQUIRE(energy_distance(SampleMatrix(a * 3.0), SampleMatrix(b * 3.0)) == doctest::Approx(3.0 * e).epsilon(1e-12));
    }
}

TEST_CASE("energy distance is non-negative across seeds") {
    long double total = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RngStream rng(seed);
        const double e = energy_distance(gaussian(100, 2, rng), gaussian(100, 2, rng));
        REQUIRE(e >= -1e-9);
        total += e;
    }
    CHECK(static_cast<double>(total / 50) >= -1e-6);
}

TEST_CASE("dimension mismatches are reported") {
    RngStream rng(9);
    CHECK_THROWS_AS(energy_distance(gaussian(5, 2, rng), gaussian(5, 3, rng)), DimensionMismatch);
    CHECK_THROWS_AS(marginal_energy(gaussian(5, 2, rng), gaussian(5, 1, rng)), DimensionMismatch);
    const auto a = random_set(10, 3, 2, rng);
    const auto b = random_set(10, 4, 2, rng);
    CHECK_THROWS_AS(score_forecast(a, b, 2), DimensionMismatch);
    CHECK_THROWS_AS(crps_sum(a, random_set(10, 3, 3, rng), 0), DimensionMismatch);
}

TEST_CASE("crps_sum definition") {
    SampleSet single(1, 1, 2, 0.1);
    single.values = {0.4, 0.6};
    CHECK(crps_sum(single, single, 0) == 0.0);

    RngStream rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_set(1 + rng.below(40), 3, 1, rng);
        const auto g = random_set(1 + rng.below(40), 3, 1, rng);
        CHECK(crps_sum(f, g, 2) == doctest::Approx(mean_truth_crps(f, g, 2, 0)).epsilon(1e-12));
        const auto f3 = random_set(1 + rng.below(40), 2, 4, rng);
        const auto g3 = random_set(1 + rng.below(40), 2, 4, rng);
        CHECK(crps_sum(f3, g3, 1, 3) == doctest::Approx(mean_truth_crps(f3, g3, 1, 1)).epsilon(1e-12));
    }
}

TEST_CASE("crps_sum of matching Gaussian sums") {
    RngStream rng(11);
    const auto f = random_set(4000, 1, 1, rng);
    const auto g = random_set(4000, 1, 1, rng);
    const double value = crps_sum(f, g, 0);
    CHECK(value == doctest::Approx(mean_truth_crps(f, g, 0, 0)).epsilon(1e-12));
    CHECK(value == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(0.02));
}

TEST_CASE("score reports are consistent with the pointwise metrics") {
    RngStream rng(12);
    const auto forecast = random_set(120, 5, 4, rng);
    const auto oracle_set = random_set(150, 5, 4, rng);
    const auto r = score_forecast(forecast, oracle_set, 3, "f", "s");
    CHECK(r.horizons == 5);
    long double e = 0, m = 0, c = 0;
    for (std::size_t h = 0; h < 5; ++h) {
        const auto fa = forecast.cross_section(h, 1, 3);
        const auto oa = oracle_set.cross_section(h, 1, 3);
        CHECK(r.per_horizon_energy[h] == energy_distance(fa, oa));
        CHECK(r.per_horizon_marginal_energy[h] == marginal_energy(fa, oa));
        CHECK(r.per_horizon_crps_sum[h] == crps_sum(forecast, oracle_set, h, 3));
        CHECK(r.per_horizon_energy[h] >= -1e-9);
        e += r.per_horizon_energy[h];
        m += r.per_horizon_marginal_energy[h];
        c += r.per_horizon_crps_sum[h];
    }
    CHECK(r.avg_energy == doctest::Approx(static_cast<double>(e / 5)).epsilon(1e-14));
    CHECK(r.avg_marginal_energy == doctest::Approx(static_cast<double>(m / 5)).epsilon(1e-14));
    CHECK(r.avg_crps_sum == doctest::Approx(static_cast<double>(c / 5)).epsilon(1e-14));
}

TEST_CASE("full-size report shape") {
    RngStream rng(13);
    const auto a = random_set(1000, 63, 10, rng);
    const auto r = score_forecast(a, a, 10);
    CHECK(r.horizons == 63);
    CHECK(r.per_horizon_energy.size() == 63);
    CHECK(r.avg_energy == 0.0);
}

TEST_CASE("score CSV rows") {
    RngStream rng(14);
    const auto a = random_set(20, 3, 2, rng);
    const auto b = random_set(20, 3, 2, rng);
    const auto r = score_forecast(a, b, 2, "dcc_garch", "sys0003");
    std::ostringstream out;
    write_score_rows(out, r);
    std::istringstream in(out.str());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].rfind("sys0003,dcc_garch,1,", 0) == 0);
    CHECK(lines[3].rfind("sys0003,dcc_garch,avg,", 0) == 0);
    CHECK(std::string(kScoreCsvHeader) == "system_id,forecaster_id,horizon,energy,marginal_energy,crps_sum");
    const auto last = lines[1].substr(lines[1].rfind(',') + 1);
    CHECK(std::stod(last) == r.per_horizon_crps_sum[1]);
}
