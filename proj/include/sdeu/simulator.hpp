#pragma once

#include "sdeu/linalg.hpp"
#include "sdeu/rng.hpp"
#include "sdeu/universe.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sdeu {

/// |x_i| beyond this raises NonFiniteState.
inline constexpr double kStateBound = 1e6;

/// One realized trajectory, T rows of D values. Row k sits at time k * dt.
struct PathMatrix {
    std::size_t n_steps = 0;
    std::size_t dims = 0;
    double dt = 0.0;
    std::vector<double> values;  // row-major T x D
    std::optional<std::vector<std::uint8_t>> regime_trace;

    [[nodiscard]] double at(std::size_t t, std::size_t d) const { return values[t * dims + d]; }
    [[nodiscard]] const double* row(std::size_t t) const { return values.data() + t * dims; }
    /// Time of the last row relative to the first.
    [[nodiscard]] double terminal_time() const { return dt * static_cast<double>(n_steps - 1); }

    friend bool operator==(const PathMatrix&, const PathMatrix&) = default;
};

/// S branched futures of H steps each. Step h of every path sits at
/// origin_time + (h + 1) * dt.
struct SampleSet {
    std::size_t n_samples = 0;
    std::size_t horizon = 0;
    std::size_t dims = 0;
    double dt = 0.0;
    std::vector<double> values;  // row-major S x H x D

    SampleSet() = default;
    SampleSet(std::size_t s, std::size_t h, std::size_t d, double step)
        : n_samples(s), horizon(h), dims(d), dt(step), values(s * h * d, 0.0) {}

    [[nodiscard]] double at(std::size_t s, std::size_t h, std::size_t d) const {
        return values[(s * horizon + h) * dims + d];
    }
    double& at(std::size_t s, std::size_t h, std::size_t d) {
        return values[(s * horizon + h) * dims + d];
    }
    /// n x len slice of dims [first, first + len) at horizon h.
    [[nodiscard]] SampleMatrix cross_section(std::size_t h, std::size_t first, std::size_t len) const;

    friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

struct StepResult {
    Vector state;
    int regime = 0;
};

/// One Euler-Maruyama step of the full system from (t, x, regime).
///
/// Within a step the regime is updated first (switch with probability
/// 1 - exp(-lambda(x) dt)), then drift, regime offset, correlated diffusion
/// and thinned jumps are applied from x.
StepResult em_step(const SdeSystemSpec& spec, double t, const Vector& x, int regime, double dt,
                   RngStream& rng);

/// Single history of T rows over `window` (dt = window / T) starting from
/// spec.init_state in regime 0. `burn_in_steps` extra steps are run and
/// discarded before row 0 when nonzero.
PathMatrix simulate_history(const SdeSystemSpec& spec, std::size_t n_steps, double window,
                            RngStream rng, std::size_t burn_in_steps = 0);

/// S independent futures of H steps (dt = window / H) from a shared origin.
/// Path s draws from derive_stream(rng, s), so the result does not depend on
/// `threads`.
SampleSet branch_futures(const SdeSystemSpec& spec, const Vector& origin_state, int origin_regime,
                         double origin_time, std::size_t n_paths, std::size_t horizon_steps,
                         double window, const RngStream& rng, unsigned threads = 1);

}  // namespace sdeu
