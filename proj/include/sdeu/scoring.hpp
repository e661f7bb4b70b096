#pragma once

#include "sdeu/linalg.hpp"
#include "sdeu/simulator.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sdeu {

/// Per-horizon scores of one forecaster on one system.
struct ScoreReport {
    std::string system_id;
    std::string forecaster_id;
    std::size_t horizons = 0;
    std::vector<double> per_horizon_energy;
    std::vector<double> per_horizon_marginal_energy;
    std::vector<double> per_horizon_crps_sum;
    double avg_energy = 0.0;
    double avg_marginal_energy = 0.0;
    double avg_crps_sum = 0.0;
};

/**
 * V-statistic energy distance between two sample sets:
 *
 *   2/(nm) sum_ij |a_i - b_j| - 1/n^2 sum_ij |a_i - a_j| - 1/m^2 sum_ij |b_i - b_j|
 *
 * Each double sum is accumulated exactly and rounded once, which makes the
 * result independent of summation order, exactly symmetric in (a, b), and
 * exactly zero for identical inputs. D = 1 uses the sorted O(n log n) form.
 */
double energy_distance(const SampleMatrix& a, const SampleMatrix& b);

/// Mean over columns of the one-dimensional energy distance.
double marginal_energy(const SampleMatrix& a, const SampleMatrix& b);

/// Empirical CRPS: 1/n sum |x_i - y| - 1/(2n^2) sum_ij |x_i - x_j|.
double crps_empirical(std::span<const double> samples, double y);

/// CRPS of the target-sum distribution at horizon h, averaged over every
/// truth draw. Targets are the last `n_targets` dims (all dims when 0).
double crps_sum(const SampleSet& forecast, const SampleSet& truth, std::size_t h,
                std::size_t n_targets = 0);

/// Oracle-side terms shared by every forecaster scored against it.
class PreparedOracle {
public:
    PreparedOracle(const SampleSet& oracle, std::size_t n_targets);

    [[nodiscard]] std::size_t horizon() const { return horizon_; }
    [[nodiscard]] std::size_t dims() const { return dims_; }
    [[nodiscard]] std::size_t n_targets() const { return n_targets_; }

private:
    friend ScoreReport score_forecast(const SampleSet&, const PreparedOracle&, const std::string&,
                                      const std::string&);

    struct HorizonTerms {
        SampleMatrix targets;                         // n x N
        double energy_self = 0.0;                     // exact sum_ij |o_i - o_j|
        std::vector<std::vector<double>> sorted_cols;  // per target, ascending
        std::vector<double> marginal_self;            // per target
        std::vector<double> sorted_sums;              // ascending target sums
    };

    std::size_t horizon_;
    std::size_t dims_;
    std::size_t n_targets_;
    std::vector<HorizonTerms> terms_;
};

/// Score a forecast against a prepared oracle; energy metrics use target dims only.
ScoreReport score_forecast(const SampleSet& forecast, const PreparedOracle& oracle,
                           const std::string& forecaster_id = {}, const std::string& system_id = {});

ScoreReport score_forecast(const SampleSet& forecast, const SampleSet& oracle, std::size_t n_targets,
                           const std::string& forecaster_id = {}, const std::string& system_id = {});

/// CSV header shared by every score table.
inline constexpr const char* kScoreCsvHeader =
    "system_id,forecaster_id,horizon,energy,marginal_energy,crps_sum";

/// One row per horizon (1-based) followed by a horizon = "avg" row.
void write_score_rows(std::ostream& out, const ScoreReport& report);

namespace detail {
/// Exact sum over ordered pairs of |x_i - x_j| for ascending x, rounded once.
double sorted_self_abs_sum(std::span<const double> sorted);
/// Exact sum over all (i, j) of |a_i - b_j| for ascending a and b, rounded once.
double sorted_cross_abs_sum(std::span<const double> a, std::span<const double> b);
}  // namespace detail

}  // namespace sdeu
