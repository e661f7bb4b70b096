#pragma once

#include "sdeu/linalg.hpp"
#include "sdeu/rng.hpp"

#include <array>
#include <set>
#include <string>
#include <vector>

namespace sdeu {

/// Curriculum position, restricted to the Markovian levels 0..7.
class CurriculumLevel {
public:
    static constexpr int kMax = 7;

    /// Throws InvalidLevel outside 0..7.
    explicit CurriculumLevel(int level);

    [[nodiscard]] int value() const noexcept { return level_; }
    friend bool operator==(CurriculumLevel, CurriculumLevel) = default;

private:
    int level_;
};

enum class DriftKind { constant, linear_mean_reversion, tanh_saturating, cubic_damped };

/// Per-dimension drift: a base term plus sinusoidal forcing.
///
///   constant               b = level_param
///   linear_mean_reversion  b = rate * (level_param - x)
///   tanh_saturating        b = rate * tanh(level_param - x)
///   cubic_damped           b = -rate * (u + u^3),  u = x - level_param
///
/// forcing s(t) = forcing_amplitude * sin(2 pi forcing_frequency t + forcing_phase)
struct DriftSpec {
    DriftKind kind = DriftKind::constant;
    double level_param = 0.0;
    double rate = 0.0;
    double forcing_amplitude = 0.0;
    double forcing_frequency = 1.0;
    double forcing_phase = 0.0;

    [[nodiscard]] double value(double t, double x) const;
};

enum class CorrelationStructure { identity, block, cross_block, global };

/// Instantaneous vol of dim i is base_vol_i * (1 + state_scale_i * |x_i|).
struct DiffusionSpec {
    std::vector<double> base_vol;
    std::vector<double> state_scale;
    CorrelationStructure correlation_structure = CorrelationStructure::identity;
    CorrelationMatrix correlation;
    CholeskyFactor chol;
};

struct JumpSpec {
    bool enabled = false;
    std::vector<double> intensity;
    std::vector<double> jump_mean;
    std::vector<double> jump_std;
    double common_jump_prob = 0.0;
};

enum class RegimeMechanism { telegraph, logistic };

/// Two-state regime process that shifts the drift additively.
///
/// telegraph: leaves regime r at constant rate telegraph_rates[r].
/// logistic:  leaves regime 0 at max_rate * sigmoid(a), regime 1 at
///            max_rate * sigmoid(-a), with a = slope . x + bias.
struct RegimeSpec {
    bool enabled = false;
    RegimeMechanism mechanism = RegimeMechanism::telegraph;
    int n_regimes = 2;
    std::vector<std::vector<double>> drift_offset;  // n_regimes x D
    std::array<double, 2> telegraph_rates{1.0, 1.0};
    double logistic_max_rate = 1.0;
    std::vector<double> logistic_slope;
    double logistic_bias = 0.0;

    /// Hazard of leaving `regime` at state x.
    [[nodiscard]] double switch_rate(int regime, const double* x, std::size_t dims) const;
};

struct SdeSystemSpec {
    int n_features = 0;
    int n_targets = 1;
    CurriculumLevel level{0};
    std::vector<DriftSpec> drift;
    DiffusionSpec diffusion;
    JumpSpec jumps;
    RegimeSpec regimes;
    std::vector<double> init_state;

    [[nodiscard]] int dims() const noexcept { return n_features + n_targets; }
};

/// Sampling ranges; every sampled real is clamped into its range.
namespace ranges {
inline constexpr double rate_lo = 0.1, rate_hi = 4.0;
inline constexpr double level_lo = -2.0, level_hi = 2.0;
inline constexpr double vol_lo = 0.05, vol_hi = 1.0;
inline constexpr double state_scale_lo = 0.0, state_scale_hi = 1.0;
inline constexpr double forcing_amp_fraction = 0.5;
inline constexpr double forcing_freq_lo = 0.5, forcing_freq_hi = 8.0;
inline constexpr double jump_intensity_lo = 0.5, jump_intensity_hi = 10.0;
inline constexpr double jump_mean_lo = -0.5, jump_mean_hi = 0.5;
inline constexpr double jump_std_lo = 0.02, jump_std_hi = 0.3;
inline constexpr double telegraph_lo = 0.5, telegraph_hi = 6.0;
inline constexpr double offset_lo = -1.0, offset_hi = 1.0;
inline constexpr double strength_lo = 0.2, strength_hi = 0.95;
inline constexpr double init_lo = -1.0, init_hi = 1.0;
inline constexpr double slope_lo = -1.0, slope_hi = 1.0;
inline constexpr double bias_lo = -1.0, bias_hi = 1.0;
}  // namespace ranges

/// Probability that a dynamic below the level's newest one is mixed in.
inline constexpr double kMixingProbability = 0.5;

/// Sample a system valid at `level`. The level's newest dynamic is always
/// present; every older dynamic is included independently with probability
/// kMixingProbability. Throws InvalidParameter when n_targets < 1 or n_features < 0.
SdeSystemSpec sample_system(CurriculumLevel level, int n_features, int n_targets, RngStream& rng);

/// Human-readable list of broken invariants; empty iff the system is valid.
std::vector<std::string> validate_spec(const SdeSystemSpec& spec);

/// Named dynamics present in a spec: "drift", "diffusion", "nonlinear_drift",
/// "forcing", "state_scaled_vol", "block_correlation", "cross_correlation",
/// "global_correlation", "jumps", "regime_switching", "state_dependent_regimes".
/// Structures that generalize another report both names.
std::set<std::string> active_dynamics(const SdeSystemSpec& spec);

const char* to_string(DriftKind kind);
const char* to_string(CorrelationStructure s);
const char* to_string(RegimeMechanism m);

}  // namespace sdeu
