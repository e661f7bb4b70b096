#include "sdeu/simulator.hpp"

#include "sdeu/error.hpp"
#include "sdeu/parallel.hpp"

#include <cmath>

namespace sdeu {
namespace {

/// Per-(spec, dt) constants and scratch space for repeated stepping.
class StepKernel {
public:
    StepKernel(const SdeSystemSpec& spec, double dt)
        : spec_(spec),
          dims_(static_cast<std::size_t>(spec.dims())),
          dt_(dt),
          sqrt_dt_(std::sqrt(dt)),
          z_(dims_),
          w_(dims_),
          next_(dims_),
          jump_prob_(dims_, 0.0) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("em_step: dt must be > 0");
        if (spec.drift.size() != dims_ || spec.init_state.size() != dims_ ||
            spec.diffusion.chol.lower.rows() != static_cast<Eigen::Index>(dims_)) {
            throw DimensionMismatch("em_step: spec components disagree on D");
        }
        if (spec.jumps.enabled) {
            for (std::size_t i = 0; i < dims_; ++i) {
                jump_prob_[i] = -std::expm1(-spec.jumps.intensity[i] * dt);
            }
        }
    }

    [[nodiscard]] std::size_t dims() const { return dims_; }

    /// Advances x (length D) and regime in place.
    void step(double t, double* x, int& regime, RngStream& rng) {
        const auto& rg = spec_.regimes;
        if (rg.enabled) {
            const double u = rng.uniform();
            const double rate = rg.switch_rate(regime, x, dims_);
            if (u < -std::expm1(-rate * dt_)) regime = 1 - regime;
        }

        for (std::size_t i = 0; i < dims_; ++i) z_[i] = rng.normal();
        const Matrix& l = spec_.diffusion.chol.lower;
        for (std::size_t i = 0; i < dims_; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k) acc += l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * z_[k];
            w_[i] = acc;
        }

        const auto& diff = spec_.diffusion;
        for (std::size_t i = 0; i < dims_; ++i) {
            double drift = spec_.drift[i].value(t, x[i]);
            if (rg.enabled) drift += rg.drift_offset[static_cast<std::size_t>(regime)][i];
            const double vol = diff.base_vol[i] * (1.0 + diff.state_scale[i] * std::abs(x[i]));
            next_[i] = x[i] + drift * dt_ + vol * w_[i] * sqrt_dt_;
        }

        const auto& jp = spec_.jumps;
        if (jp.enabled) {
            const bool common = rng.uniform() < jp.common_jump_prob;
            const double shared = rng.uniform();
            for (std::size_t i = 0; i < dims_; ++i) {
                const double own = rng.uniform();
                const double size = jp.jump_mean[i] + jp.jump_std[i] * rng.normal();
                if ((common ? shared : own) < jump_prob_[i]) next_[i] += size;
            }
        }

        for (std::size_t i = 0; i < dims_; ++i) {
            if (!std::isfinite(next_[i]) || std::abs(next_[i]) > kStateBound) {
                throw NonFiniteState("state left the finite domain in dim " + std::to_string(i), -1);
            }
            x[i] = next_[i];
        }
    }

private:
    const SdeSystemSpec& spec_;
    std::size_t dims_;
    double dt_;
    double sqrt_dt_;
    std::vector<double> z_;
    std::vector<double> w_;
    std::vector<double> next_;
    std::vector<double> jump_prob_;
};

[[noreturn]] void rethrow_at(const NonFiniteState& e, std::int64_t step) {
    throw NonFiniteState(std::string(e.what()), step);
}

}  // namespace

SampleMatrix SampleSet::cross_section(std::size_t h, std::size_t first, std::size_t len) const {
    if (h >= horizon || first + len > dims) throw DimensionMismatch("cross_section out of range");
    SampleMatrix out(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(len));
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double* src = values.data() + (s * horizon + h) * dims + first;
        for (std::size_t d = 0; d < len; ++d) out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(d)) = src[d];
    }
    return out;
}

StepResult em_step(const SdeSystemSpec& spec, double t, const Vector& x, int regime, double dt,
                   RngStream& rng) {
    StepKernel kernel(spec, dt);
    if (x.size() != static_cast<Eigen::Index>(kernel.dims())) throw DimensionMismatch("em_step: state has wrong length");
    if (!x.allFinite()) throw NonFiniteState("em_step: input state not finite", -1);
    StepResult out{x, regime};
    kernel.step(t, out.state.data(), out.regime, rng);
    return out;
}

PathMatrix simulate_history(const SdeSystemSpec& spec, std::size_t n_steps, double window,
                            RngStream rng, std::size_t burn_in_steps) {
    if (n_steps < 2) throw InvalidParameter("simulate_history: T must be >= 2");
    if (!(window > 0.0)) throw InvalidParameter("simulate_history: window must be > 0");
    const double dt = window / static_cast<double>(n_steps);
    StepKernel kernel(spec, dt);
    const std::size_t d = kernel.dims();

    PathMatrix path;
    path.n_steps = n_steps;
    path.dims = d;
    path.dt = dt;
    path.values.resize(n_steps * d);
    if (spec.regimes.enabled) path.regime_trace.emplace(n_steps, std::uint8_t{0});

    std::vector<double> x(spec.init_state);
    int regime = 0;
    for (std::size_t k = 0; k < burn_in_steps; ++k) {
        try {
            kernel.step(-static_cast<double>(burn_in_steps - k) * dt, x.data(), regime, rng);
        } catch (const NonFiniteState& e) {
            rethrow_at(e, -static_cast<std::int64_t>(burn_in_steps - k));
        }
    }
    for (std::size_t k = 0; k < n_steps; ++k) {
        if (k > 0) {
            try {
                kernel.step(static_cast<double>(k - 1) * dt, x.data(), regime, rng);
            } catch (const NonFiniteState& e) {
                rethrow_at(e, static_cast<std::int64_t>(k));
            }
        }
        std::copy(x.begin(), x.end(), path.values.begin() + static_cast<std::ptrdiff_t>(k * d));
        if (path.regime_trace) (*path.regime_trace)[k] = static_cast<std::uint8_t>(regime);
    }
    return path;
}

SampleSet branch_futures(const SdeSystemSpec& spec, const Vector& origin_state, int origin_regime,
                         double origin_time, std::size_t n_paths, std::size_t horizon_steps,
                         double window, const RngStream& rng, unsigned threads) {
    if (n_paths < 1 || horizon_steps < 1) throw InvalidParameter("branch_futures: S and H must be >= 1");
    if (!(window > 0.0)) throw InvalidParameter("branch_futures: window must be > 0");
    const auto d = static_cast<std::size_t>(spec.dims());
    if (origin_state.size() != static_cast<Eigen::Index>(d)) {
        throw DimensionMismatch("branch_futures: origin state has wrong length");
    }
    const double dt = window / static_cast<double>(horizon_steps);
    SampleSet out(n_paths, horizon_steps, d, dt);

    parallel_for(n_paths, threads, [&](std::size_t s) {
        StepKernel kernel(spec, dt);
        RngStream path_rng = rng.derive(s);
        std::vector<double> x(origin_state.data(), origin_state.data() + d);
        int regime = origin_regime;
        for (std::size_t h = 0; h < horizon_steps; ++h) {
            try {
                kernel.step(origin_time + static_cast<double>(h) * dt, x.data(), regime, path_rng);
            } catch (const NonFiniteState& e) {
                rethrow_at(e, static_cast<std::int64_t>(h));
            }
            std::copy(x.begin(), x.end(), out.values.begin() + static_cast<std::ptrdiff_t>((s * horizon_steps + h) * d));
        }
    });
    return out;
}

}  // namespace sdeu
