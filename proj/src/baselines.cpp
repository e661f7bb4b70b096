#include "sdeu/baselines.hpp"

#include "sdeu/error.hpp"
#include "sdeu/optimize.hpp"
#include "sdeu/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sdeu {
namespace {

constexpr double kMaxPersistence = 1.0 - 1e-6;
constexpr std::size_t kMinFitLength = 50;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

/// (persistence, share) <-> (first, second) with first + second < 1.
struct PersistenceTransform {
    static Vector to_unconstrained(double first, double second) {
        const double s = std::clamp(first + second, 1e-4, kMaxPersistence - 1e-6);
        const double p = std::clamp(first / (first + second), 1e-4, 1.0 - 1e-4);
        Vector u(2);
        u << logit(s / kMaxPersistence), logit(p);
        return u;
    }
    static std::pair<double, double> from_unconstrained(double us, double up) {
        const double s = kMaxPersistence * logistic(us);
        const double p = logistic(up);
        return {s * p, s * (1.0 - p)};
    }
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments moments(std::span<const double> x) {
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (double v : x) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= static_cast<double>(x.size());
    return m;
}

double garch_nll(double omega, double alpha, double beta, double mean, double h0,
                 std::span<const double> r) {
    double h = h0;
    double nll = 0.0;
    for (double x : r) {
        const double e = x - mean;
        nll += std::log(h) + e * e / h;
        h = std::max(omega + alpha * e * e + beta * h, kVarianceFloor);
    }
    return 0.5 * (nll + static_cast<double>(r.size()) * std::log(2.0 * std::numbers::pi));
}

Matrix normalize_q(const Matrix& q) {
    const Vector inv = q.diagonal().cwiseMax(kVarianceFloor).cwiseSqrt().cwiseInverse();
    Matrix r = inv.asDiagonal() * q * inv.asDiagonal();
    r.diagonal().setOnes();
    return r;
}

/// Correlation part of the DCC quasi-likelihood (constant terms dropped).
double dcc_nll(double a, double b, const Matrix& qbar, const std::vector<Vector>& z) {
    Matrix q = qbar;
    double nll = 0.0;
    Eigen::LLT<Matrix> llt;
    for (const Vector& zt : z) {
        const Matrix r = normalize_q(q);
        llt.compute(r);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        const Matrix& l = llt.matrixL();
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
        const Vector y = llt.matrixL().solve(zt);
        nll += logdet + y.squaredNorm() - zt.squaredNorm();
        q = (1.0 - a - b) * qbar + a * zt * zt.transpose() + b * q;
    }
    return 0.5 * nll;
}

Matrix safe_chol(const Matrix& r) {
    try {
        return cholesky(r).lower;
    } catch (const NotPositiveDefinite&) {
        return cholesky(nearest_pd_repair(r, kPdFloor)).lower;
    }
}

std::vector<double> column(const std::vector<double>& rows, std::size_t n_rows, std::size_t dims,
                           std::size_t d) {
    std::vector<double> out(n_rows);
    for (std::size_t t = 0; t < n_rows; ++t) out[t] = rows[t * dims + d];
    return out;
}

struct DccState {
    std::vector<double> h_next;  // one-step-ahead variances per series
    Matrix q_next;
};

/// Runs both recursions through the history; also returns standardized residuals.
DccState filter_history(const DccParams& p, const std::vector<double>& diffs, std::size_t n_rows,
                        std::size_t dims, std::vector<Vector>* z_out) {
    DccState st;
    st.h_next.resize(dims);
    std::vector<std::vector<double>> h(dims);
    for (std::size_t d = 0; d < dims; ++d) h[d] = garch_variances(p.per_series[d], column(diffs, n_rows, dims, d));
    const Matrix& qbar = p.unconditional_corr.entries;
    Matrix q = qbar;
    Vector z(static_cast<Eigen::Index>(dims));
    for (std::size_t t = 0; t < n_rows; ++t) {
        for (std::size_t d = 0; d < dims; ++d) {
            z(static_cast<Eigen::Index>(d)) =
                (diffs[t * dims + d] - p.per_series[d].mean) / std::sqrt(h[d][t]);
        }
        if (z_out) z_out->push_back(z);
        q = (1.0 - p.a - p.b) * qbar + p.a * z * z.transpose() + p.b * q;
    }
    for (std::size_t d = 0; d < dims; ++d) st.h_next[d] = h[d][n_rows];
    st.q_next = q;
    return st;
}

}  // namespace

bool DccParams::any_fallback() const {
    if (correlation_status.fallback) return true;
    return std::any_of(series_status.begin(), series_status.end(), [](const FitStatus& s) { return s.fallback; });
}

std::vector<double> first_differences(const PathMatrix& history) {
    if (history.n_steps < 2) throw DegenerateHistory("history needs at least 2 steps");
    const std::size_t d = history.dims;
    std::vector<double> out((history.n_steps - 1) * d);
    for (std::size_t t = 1; t < history.n_steps; ++t) {
        for (std::size_t k = 0; k < d; ++k) out[(t - 1) * d + k] = history.at(t, k) - history.at(t - 1, k);
    }
    return out;
}

SampleSet historical_simulation(const PathMatrix& history, std::size_t n_paths, std::size_t horizon,
                                const RngStream& rng, unsigned threads) {
    if (history.n_steps < 2) throw DegenerateHistory("historical_simulation: history has T < 2");
    if (n_paths < 1 || horizon < 1) throw InvalidParameter("historical_simulation: S and H must be >= 1");
    const std::size_t d = history.dims;
    const std::size_t rows = history.n_steps - 1;
    const std::vector<double> inc = first_differences(history);
    const double* terminal = history.row(history.n_steps - 1);

    SampleSet out(n_paths, horizon, d, history.dt);
    parallel_for(n_paths, threads, [&](std::size_t s) {
        RngStream path_rng = rng.derive(s);
        std::vector<double> x(terminal, terminal + d);
        for (std::size_t h = 0; h < horizon; ++h) {
            const std::size_t pick = path_rng.below(rows);
            for (std::size_t k = 0; k < d; ++k) {
                x[k] += inc[pick * d + k];
                out.at(s, h, k) = x[k];
            }
        }
    });
    return out;
}

std::vector<double> garch_variances(const Garch11Params& p, std::span<const double> returns) {
    std::vector<double> h(returns.size() + 1);
    h[0] = std::max(moments(returns).variance, kVarianceFloor);
    for (std::size_t t = 0; t < returns.size(); ++t) {
        const double e = returns[t] - p.mean;
        h[t + 1] = std::max(p.omega + p.alpha * e * e + p.beta * h[t], kVarianceFloor);
    }
    return h;
}

Garch11Params fit_garch11(std::span<const double> returns) {
    if (returns.size() < kMinFitLength) {
        throw FitFailed("garch: need at least 50 observations, got " + std::to_string(returns.size()));
    }
    const Moments m = moments(returns);
    if (!std::isfinite(m.variance) || m.variance < kVarianceFloor) throw FitFailed("garch: zero variance series");

    // Work on a unit-variance scale so the optimizer sees O(1) parameters.
    const double scale = m.variance;
    std::vector<double> r(returns.size());
    for (std::size_t t = 0; t < r.size(); ++t) r[t] = (returns[t] - m.mean) / std::sqrt(scale);

    auto objective = [&](const Vector& u) {
        const double omega = std::exp(u(0));
        const auto [alpha, beta] = PersistenceTransform::from_unconstrained(u(1), u(2));
        return garch_nll(omega, alpha, beta, 0.0, 1.0, r);
    };

    constexpr std::array<std::pair<double, double>, 3> starts{{{0.05, 0.9}, {0.1, 0.8}, {0.02, 0.95}}};
    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& [alpha0, beta0] : starts) {
        Vector u0(3);
        u0(0) = std::log(1.0 - alpha0 - beta0);  // variance targeting on the unit scale
        u0.tail(2) = PersistenceTransform::to_unconstrained(alpha0, beta0);
        MinimizeResult res = nelder_mead(objective, u0);
        res = nelder_mead(objective, res.x, {.max_evaluations = 4000, .f_tolerance = 1e-12, .initial_step = 0.1});
        if (res.value < best.value) best = res;
    }
    if (!std::isfinite(best.value)) throw FitFailed("garch: likelihood not finite at any start");

    Garch11Params p;
    p.omega = std::exp(best.x(0)) * scale;
    std::tie(p.alpha, p.beta) = PersistenceTransform::from_unconstrained(best.x(1), best.x(2));
    p.mean = m.mean;
    if (!std::isfinite(p.omega) || !(p.omega > 0.0) || !(p.persistence() < 1.0)) {
        throw FitFailed("garch: optimizer left the admissible region");
    }
    return p;
}

Garch11Fit fit_garch11_or_fallback(std::span<const double> returns) {
    try {
        return {fit_garch11(returns), {}};
    } catch (const FitFailed& e) {
        Garch11Fit fit;
        if (!returns.empty()) {
            const Moments m = moments(returns);
            fit.params.mean = m.mean;
            fit.params.omega = std::isfinite(m.variance) ? std::max(m.variance, kVarianceFloor) : kVarianceFloor;
        } else {
            fit.params.omega = kVarianceFloor;
        }
        fit.status = {true, e.what()};
        return fit;
    }
}

DccParams fit_dcc(const PathMatrix& history) {
    if (history.n_steps < 2) throw DegenerateHistory("fit_dcc: history has T < 2");
    const std::size_t dims = history.dims;
    const std::size_t rows = history.n_steps - 1;
    const std::vector<double> diffs = first_differences(history);

    DccParams p;
    for (std::size_t d = 0; d < dims; ++d) {
        Garch11Fit fit = fit_garch11_or_fallback(column(diffs, rows, dims, d));
        p.per_series.push_back(fit.params);
        p.series_status.push_back(std::move(fit.status));
    }

    // Correlation targeting on standardized residuals.
    p.unconditional_corr = CorrelationMatrix::identity(static_cast<Eigen::Index>(dims));
    std::vector<Vector> z;
    filter_history(p, diffs, rows, dims, &z);
    Matrix s = Matrix::Zero(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(dims));
    for (const Vector& zt : z) s += zt * zt.transpose();
    s /= static_cast<double>(z.size());
    if (s.allFinite() && s.diagonal().minCoeff() > kVarianceFloor) {
        p.unconditional_corr = {nearest_pd_repair(normalize_q(s), kPdFloor)};
    }

    if (dims < 2) {
        p.correlation_status = {true, "dcc: fewer than two series"};
        return p;
    }
    if (rows < kMinFitLength) {
        p.correlation_status = {true, "dcc: need at least 50 observations"};
        return p;
    }

    const Matrix& qbar = p.unconditional_corr.entries;
    auto objective = [&](const Vector& u) {
        const auto [a, b] = PersistenceTransform::from_unconstrained(u(0), u(1));
        return dcc_nll(a, b, qbar, z);
    };
    constexpr std::array<std::pair<double, double>, 3> starts{{{0.05, 0.9}, {0.02, 0.95}, {0.1, 0.8}}};
    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (const auto& [a0, b0] : starts) {
        MinimizeResult res = nelder_mead(objective, PersistenceTransform::to_unconstrained(a0, b0),
                                         {.max_evaluations = 600, .f_tolerance = 1e-10, .initial_step = 0.5});
        if (res.value < best.value) best = res;
    }
    const double constant_nll = dcc_nll(0.0, 0.0, qbar, z);
    if (!std::isfinite(best.value)) {
        p.correlation_status = {true, "dcc: likelihood not finite at any start"};
        return p;
    }
    if (best.value < constant_nll) {
        std::tie(p.a, p.b) = PersistenceTransform::from_unconstrained(best.x(0), best.x(1));
    }
    return p;
}

SampleSet dcc_forecast(const DccParams& params, const PathMatrix& history, std::size_t n_paths,
                       std::size_t horizon, const RngStream& rng, unsigned threads) {
    if (history.n_steps < 2) throw DegenerateHistory("dcc_forecast: history has T < 2");
    if (n_paths < 1 || horizon < 1) throw InvalidParameter("dcc_forecast: S and H must be >= 1");
    const std::size_t dims = history.dims;
    if (params.per_series.size() != dims || params.unconditional_corr.dim() != static_cast<Eigen::Index>(dims)) {
        throw DimensionMismatch("dcc_forecast: parameters do not match history dims");
    }
    const std::size_t rows = history.n_steps - 1;
    const std::vector<double> diffs = first_differences(history);
    const DccState start = filter_history(params, diffs, rows, dims, nullptr);
    const Matrix& qbar = params.unconditional_corr.entries;
    const double* terminal = history.row(history.n_steps - 1);
    const auto d = static_cast<Eigen::Index>(dims);

    SampleSet out(n_paths, horizon, dims, history.dt);
    parallel_for(n_paths, threads, [&](std::size_t s) {
        RngStream path_rng = rng.derive(s);
        std::vector<double> x(terminal, terminal + dims);
        std::vector<double> h = start.h_next;
        Matrix q = start.q_next;
        Vector u(d);
        for (std::size_t step = 0; step < horizon; ++step) {
            const Matrix l = safe_chol(normalize_q(q));
            for (Eigen::Index i = 0; i < d; ++i) u(i) = path_rng.normal();
            const Vector e = l.triangularView<Eigen::Lower>() * u;
            for (std::size_t k = 0; k < dims; ++k) {
                const Garch11Params& g = params.per_series[k];
                const double eps = std::sqrt(h[k]) * e(static_cast<Eigen::Index>(k));
                x[k] += g.mean + eps;
                out.at(s, step, k) = x[k];
                h[k] = std::max(g.omega + g.alpha * eps * eps + g.beta * h[k], kVarianceFloor);
            }
            q = (1.0 - params.a - params.b) * qbar + params.a * e * e.transpose() + params.b * q;
        }
    });
    return out;
}

}  // namespace sdeu
