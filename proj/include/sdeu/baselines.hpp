#pragma once

#include "sdeu/linalg.hpp"
#include "sdeu/rng.hpp"
#include "sdeu/simulator.hpp"

#include <span>
#include <string>
#include <vector>

namespace sdeu {

/// Floor applied to every conditional variance.
inline constexpr double kVarianceFloor = 1e-12;

/// h_t = omega + alpha * eps_{t-1}^2 + beta * h_{t-1}
struct Garch11Params {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double mean = 0.0;

    [[nodiscard]] double persistence() const { return alpha + beta; }
    [[nodiscard]] double unconditional_variance() const { return omega / (1.0 - alpha - beta); }
};

/// Whether a fitted component fell back to its degenerate model.
struct FitStatus {
    bool fallback = false;
    std::string reason;
};

struct Garch11Fit {
    Garch11Params params;
    FitStatus status;
};

/// Q_t = (1 - a - b) Qbar + a z_{t-1} z_{t-1}' + b Q_{t-1},  R_t = normalize(Q_t)
struct DccParams {
    double a = 0.0;
    double b = 0.0;
    CorrelationMatrix unconditional_corr;
    std::vector<Garch11Params> per_series;
    std::vector<FitStatus> series_status;
    FitStatus correlation_status;

    [[nodiscard]] bool any_fallback() const;
};

/// Row-joint bootstrap of the history's first differences, cumulated from the
/// terminal state. Path s resamples from derive_stream(rng, s).
SampleSet historical_simulation(const PathMatrix& history, std::size_t n_paths, std::size_t horizon,
                                const RngStream& rng, unsigned threads = 1);

/// Gaussian QMLE of GARCH(1,1) on a return series (at least 50 points).
/// Three starting points, best likelihood wins. Throws FitFailed.
Garch11Params fit_garch11(std::span<const double> returns);

/// fit_garch11 with the constant-variance fallback (alpha = beta = 0,
/// omega = sample variance floored at kVarianceFloor) on failure.
Garch11Fit fit_garch11_or_fallback(std::span<const double> returns);

/// Conditional variances h_0..h_T for a return series; h_0 is the sample
/// variance, h_T is the one-step-ahead forecast.
std::vector<double> garch_variances(const Garch11Params& p, std::span<const double> returns);

/// Two-stage DCC: per-series GARCH(1,1), correlation targeting on the
/// standardized residuals, then QMLE of (a, b). Fallbacks are flagged, never thrown.
DccParams fit_dcc(const PathMatrix& history);

/// Simulated DCC-GARCH forecast with Gaussian innovations, cumulated from the
/// history's terminal state. Path s draws from derive_stream(rng, s).
SampleSet dcc_forecast(const DccParams& params, const PathMatrix& history, std::size_t n_paths,
                       std::size_t horizon, const RngStream& rng, unsigned threads = 1);

/// (T-1) x D first differences of a path, row-major.
std::vector<double> first_differences(const PathMatrix& history);

}  // namespace sdeu
