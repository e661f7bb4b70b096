#include "sdeu/scoring.hpp"

#include "sdeu/error.hpp"
#include "sdeu/exact_sum.hpp"
#include "sdeu/format.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace sdeu {

namespace detail {

double sorted_self_abs_sum(std::span<const double> sorted) {
    // sum_{i<j} (x_j - x_i) = sum_k x_k (2k - n + 1); ordered pairs double it.
    ExactSum acc;
    const auto n = static_cast<double>(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double coef = 2.0 * (2.0 * static_cast<double>(k) - n + 1.0);
        if (coef != 0.0) acc.add_product(sorted[k], coef);
    }
    return acc.result();
}

double sorted_cross_abs_sum(std::span<const double> a, std::span<const double> b) {
    // Walk the merged order; each element contributes itself times
    // (#other-set elements before it) - (#other-set elements after it).
    ExactSum acc;
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
            const double before = static_cast<double>(j);
            const double coef = before - (nb - before);
            if (coef != 0.0) acc.add_product(a[i], coef);
            ++i;
        } else {
            const double before = static_cast<double>(i);
            const double coef = before - (na - before);
            if (coef != 0.0) acc.add_product(b[j], coef);
            ++j;
        }
    }
    return acc.result();
}

}  // namespace detail

namespace {

std::vector<double> sorted_column(const SampleMatrix& m, Eigen::Index col) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, col);
    std::sort(out.begin(), out.end());
    return out;
}

double combine(double cross, double self_a, double self_b, double n, double m) {
    // 2C/(nm) - (A/n^2 + B/m^2): with a == b the two sides round identically.
    return 2.0 * (cross / (n * m)) - (self_a / (n * n) + self_b / (m * m));
}

inline double row_distance(const double* x, const double* y, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = x[k] - y[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

double cross_norm_sum(const SampleMatrix& a, const SampleMatrix& b) {
    ExactSum acc;
    const Eigen::Index d = a.cols();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double* x = a.data() + i * d;
        for (Eigen::Index j = 0; j < b.rows(); ++j) acc.add(row_distance(x, b.data() + j * d, d));
    }
    return acc.result();
}

double self_norm_sum(const SampleMatrix& a) {
    ExactSum acc;
    const Eigen::Index d = a.cols();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double* x = a.data() + i * d;
        for (Eigen::Index j = i + 1; j < a.rows(); ++j) acc.add(row_distance(x, a.data() + j * d, d));
    }
    return 2.0 * acc.result();
}

double energy_1d_sorted(std::span<const double> a, double self_a, std::span<const double> b,
                        double self_b) {
    const double cross = detail::sorted_cross_abs_sum(a, b);
    return combine(cross, self_a, self_b, static_cast<double>(a.size()), static_cast<double>(b.size()));
}

void check_pair(const SampleMatrix& a, const SampleMatrix& b) {
    if (a.rows() < 1 || b.rows() < 1) throw InvalidParameter("energy: sample sets must be non-empty");
    if (a.cols() != b.cols()) {
        throw DimensionMismatch("energy: dimension " + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.cols()));
    }
}

std::vector<double> target_sums(const SampleSet& set, std::size_t h, std::size_t first) {
    std::vector<double> out(set.n_samples);
    for (std::size_t s = 0; s < set.n_samples; ++s) {
        double acc = 0.0;
        for (std::size_t d = first; d < set.dims; ++d) acc += set.at(s, h, d);
        out[s] = acc;
    }
    return out;
}

double crps_sum_sorted(const std::vector<double>& forecast_sorted, double forecast_self,
                       const std::vector<double>& truth_sorted) {
    // Mean over truth draws g of [1/n sum_i |x_i - g| - self/(2 n^2)].
    const auto n = static_cast<double>(forecast_sorted.size());
    const auto g = static_cast<double>(truth_sorted.size());
    const double cross = detail::sorted_cross_abs_sum(forecast_sorted, truth_sorted);
    return cross / (n * g) - forecast_self / (2.0 * n * n);
}

double mean_of(const std::vector<double>& v) {
    ExactSum acc;
    for (double x : v) acc.add(x);
    return v.empty() ? 0.0 : acc.result() / static_cast<double>(v.size());
}

}  // namespace

double energy_distance(const SampleMatrix& a, const SampleMatrix& b) {
    check_pair(a, b);
    if (a.cols() == 1) {
        const auto sa = sorted_column(a, 0);
        const auto sb = sorted_column(b, 0);
        return energy_1d_sorted(sa, detail::sorted_self_abs_sum(sa), sb, detail::sorted_self_abs_sum(sb));
    }
    return combine(cross_norm_sum(a, b), self_norm_sum(a), self_norm_sum(b),
                   static_cast<double>(a.rows()), static_cast<double>(b.rows()));
}

double marginal_energy(const SampleMatrix& a, const SampleMatrix& b) {
    check_pair(a, b);
    std::vector<double> per_dim(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index d = 0; d < a.cols(); ++d) {
        const auto sa = sorted_column(a, d);
        const auto sb = sorted_column(b, d);
        per_dim[static_cast<std::size_t>(d)] =
            energy_1d_sorted(sa, detail::sorted_self_abs_sum(sa), sb, detail::sorted_self_abs_sum(sb));
    }
    if (per_dim.size() == 1) return per_dim[0];
    return mean_of(per_dim);
}

double crps_empirical(std::span<const double> samples, double y) {
    if (samples.empty()) throw InvalidParameter("crps_empirical: no samples");
    ExactSum spread;
    for (double x : samples) spread.add_abs_difference(x, y);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    return spread.result() / n - detail::sorted_self_abs_sum(sorted) / (2.0 * n * n);
}

double crps_sum(const SampleSet& forecast, const SampleSet& truth, std::size_t h,
                std::size_t n_targets) {
    if (forecast.dims != truth.dims) throw DimensionMismatch("crps_sum: dims differ");
    if (h >= forecast.horizon || h >= truth.horizon) throw DimensionMismatch("crps_sum: horizon out of range");
    if (n_targets == 0) n_targets = forecast.dims;
    if (n_targets > forecast.dims) throw DimensionMismatch("crps_sum: more targets than dims");
    const std::size_t first = forecast.dims - n_targets;
    auto f = target_sums(forecast, h, first);
    auto g = target_sums(truth, h, first);
    std::sort(f.begin(), f.end());
    std::sort(g.begin(), g.end());
    return crps_sum_sorted(f, detail::sorted_self_abs_sum(f), g);
}

PreparedOracle::PreparedOracle(const SampleSet& oracle, std::size_t n_targets)
    : horizon_(oracle.horizon), dims_(oracle.dims), n_targets_(n_targets) {
    if (n_targets_ < 1 || n_targets_ > dims_) throw DimensionMismatch("oracle: invalid target count");
    const std::size_t first = dims_ - n_targets_;
    terms_.resize(horizon_);
    for (std::size_t h = 0; h < horizon_; ++h) {
        HorizonTerms& t = terms_[h];
        t.targets = oracle.cross_section(h, first, n_targets_);
        if (n_targets_ > 1) t.energy_self = self_norm_sum(t.targets);
        for (std::size_t d = 0; d < n_targets_; ++d) {
            t.sorted_cols.push_back(sorted_column(t.targets, static_cast<Eigen::Index>(d)));
            t.marginal_self.push_back(detail::sorted_self_abs_sum(t.sorted_cols.back()));
        }
        t.sorted_sums = target_sums(oracle, h, first);
        std::sort(t.sorted_sums.begin(), t.sorted_sums.end());
    }
}

ScoreReport score_forecast(const SampleSet& forecast, const PreparedOracle& oracle,
                           const std::string& forecaster_id, const std::string& system_id) {
    if (forecast.horizon != oracle.horizon_ || forecast.dims != oracle.dims_) {
        throw DimensionMismatch("score_forecast: forecast is " + std::to_string(forecast.horizon) + "x" +
                                std::to_string(forecast.dims) + ", oracle is " +
                                std::to_string(oracle.horizon_) + "x" + std::to_string(oracle.dims_));
    }
    const std::size_t n_t = oracle.n_targets_;
    const std::size_t first = forecast.dims - n_t;
    const auto n = static_cast<double>(forecast.n_samples);

    ScoreReport r;
    r.system_id = system_id;
    r.forecaster_id = forecaster_id;
    r.horizons = forecast.horizon;
    r.per_horizon_energy.resize(r.horizons);
    r.per_horizon_marginal_energy.resize(r.horizons);
    r.per_horizon_crps_sum.resize(r.horizons);

    for (std::size_t h = 0; h < r.horizons; ++h) {
        const auto& o = oracle.terms_[h];
        const SampleMatrix f = forecast.cross_section(h, first, n_t);
        const auto m = static_cast<double>(o.targets.rows());

        std::vector<double> marginals(n_t);
        for (std::size_t d = 0; d < n_t; ++d) {
            const auto col = sorted_column(f, static_cast<Eigen::Index>(d));
            marginals[d] = energy_1d_sorted(col, detail::sorted_self_abs_sum(col), o.sorted_cols[d],
                                            o.marginal_self[d]);
        }
        r.per_horizon_marginal_energy[h] = n_t == 1 ? marginals[0] : mean_of(marginals);
        if (n_t == 1) {
            r.per_horizon_energy[h] = marginals[0];
        } else {
            r.per_horizon_energy[h] =
                combine(cross_norm_sum(f, o.targets), self_norm_sum(f), o.energy_self, n, m);
        }

        auto sums = target_sums(forecast, h, first);
        std::sort(sums.begin(), sums.end());
        r.per_horizon_crps_sum[h] = crps_sum_sorted(sums, detail::sorted_self_abs_sum(sums), o.sorted_sums);
    }
    r.avg_energy = mean_of(r.per_horizon_energy);
    r.avg_marginal_energy = mean_of(r.per_horizon_marginal_energy);
    r.avg_crps_sum = mean_of(r.per_horizon_crps_sum);
    return r;
}

ScoreReport score_forecast(const SampleSet& forecast, const SampleSet& oracle, std::size_t n_targets,
                           const std::string& forecaster_id, const std::string& system_id) {
    if (forecast.horizon != oracle.horizon || forecast.dims != oracle.dims) {
        throw DimensionMismatch("score_forecast: forecast and oracle shapes differ");
    }
    return score_forecast(forecast, PreparedOracle(oracle, n_targets), forecaster_id, system_id);
}

void write_score_rows(std::ostream& out, const ScoreReport& report) {
    for (std::size_t h = 0; h < report.horizons; ++h) {
        out << report.system_id << ',' << report.forecaster_id << ',' << (h + 1) << ','
            << format_double(report.per_horizon_energy[h]) << ','
            << format_double(report.per_horizon_marginal_energy[h]) << ','
            << format_double(report.per_horizon_crps_sum[h]) << '\n';
    }
    out << report.system_id << ',' << report.forecaster_id << ",avg," << format_double(report.avg_energy)
        << ',' << format_double(report.avg_marginal_energy) << ',' << format_double(report.avg_crps_sum)
        << '\n';
}

}  // namespace sdeu
