#include "sdeu/universe.hpp"

#include "sdeu/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sdeu {

CurriculumLevel::CurriculumLevel(int level) : level_(level) {
    if (level < 0 || level > kMax) {
        throw InvalidLevel("curriculum level " + std::to_string(level) + " outside 0..7");
    }
}

double DriftSpec::value(double t, double x) const {
    double base = 0.0;
    switch (kind) {
        case DriftKind::constant:
            base = level_param;
            break;
        case DriftKind::linear_mean_reversion:
            base = rate * (level_param - x);
            break;
        case DriftKind::tanh_saturating:
            base = rate * std::tanh(level_param - x);
            break;
        case DriftKind::cubic_damped: {
            const double u = x - level_param;
            base = -rate * (u + u * u * u);
            break;
        }
    }
    if (forcing_amplitude != 0.0) {
        base += forcing_amplitude *
                std::sin(2.0 * std::numbers::pi * forcing_frequency * t + forcing_phase);
    }
    return base;
}

double RegimeSpec::switch_rate(int regime, const double* x, std::size_t dims) const {
    if (!enabled) return 0.0;
    if (mechanism == RegimeMechanism::telegraph) return telegraph_rates[regime == 0 ? 0 : 1];
    double a = logistic_bias;
    for (std::size_t i = 0; i < dims; ++i) a += logistic_slope[i] * x[i];
    if (regime != 0) a = -a;
    return logistic_max_rate / (1.0 + std::exp(-a));
}

const char* to_string(DriftKind kind) {
    switch (kind) {
        case DriftKind::constant: return "constant";
        case DriftKind::linear_mean_reversion: return "linear_mean_reversion";
        case DriftKind::tanh_saturating: return "tanh_saturating";
        case DriftKind::cubic_damped: return "cubic_damped";
    }
    return "?";
}

const char* to_string(CorrelationStructure s) {
    switch (s) {
        case CorrelationStructure::identity: return "identity";
        case CorrelationStructure::block: return "block";
        case CorrelationStructure::cross_block: return "cross_block";
        case CorrelationStructure::global: return "global";
    }
    return "?";
}

const char* to_string(RegimeMechanism m) {
    return m == RegimeMechanism::telegraph ? "telegraph" : "logistic";
}

namespace {

double uniform_in(RngStream& rng, double lo, double hi) {
    return std::clamp(lo + (hi - lo) * rng.uniform(), lo, hi);
}

bool coin(RngStream& rng) { return rng.uniform() < kMixingProbability; }

Matrix block_diagonal(const Matrix& f, const Matrix& y) {
    Matrix out = Matrix::Zero(f.rows() + y.rows(), f.rows() + y.rows());
    out.topLeftCorner(f.rows(), f.rows()) = f;
    out.bottomRightCorner(y.rows(), y.rows()) = y;
    return out;
}

Matrix sample_structured_correlation(CorrelationStructure structure, int m, int n,
                                     RngStream& rng) {
    const int d = m + n;
    switch (structure) {
        case CorrelationStructure::identity:
            return Matrix::Identity(d, d);
        case CorrelationStructure::global: {
            const double strength = uniform_in(rng, ranges::strength_lo, ranges::strength_hi);
            return sample_correlation(d, strength, rng).entries;
        }
        case CorrelationStructure::block:
        case CorrelationStructure::cross_block: {
            // F block first so the Y block law does not depend on M when M = 0.
            Matrix f(0, 0);
            if (m > 0) {
                const double sf = uniform_in(rng, ranges::strength_lo, ranges::strength_hi);
                f = sample_correlation(m, sf, rng).entries;
            }
            const double sy = uniform_in(rng, ranges::strength_lo, ranges::strength_hi);
            Matrix y = sample_correlation(n, sy, rng).entries;
            Matrix out = block_diagonal(f, y);
            if (structure == CorrelationStructure::cross_block && m > 0) {
                const double sg = uniform_in(rng, ranges::strength_lo, ranges::strength_hi);
                const Matrix g = sample_correlation(d, sg, rng).entries;
                out.topRightCorner(m, n) = g.topRightCorner(m, n);
                out.bottomLeftCorner(n, m) = g.bottomLeftCorner(n, m);
                out = nearest_pd_repair(out, kPdFloor);
            }
            return out;
        }
    }
    return Matrix::Identity(d, d);
}

bool is_identity(const Matrix& m) {
    return (m - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

SdeSystemSpec sample_system(CurriculumLevel level, int n_features, int n_targets, RngStream& rng) {
    if (n_targets < 1) throw InvalidParameter("sample_system: n_targets must be >= 1");
    if (n_features < 0) throw InvalidParameter("sample_system: n_features must be >= 0");
    const int lv = level.value();
    const int d = n_features + n_targets;

    SdeSystemSpec spec;
    spec.n_features = n_features;
    spec.n_targets = n_targets;
    spec.level = level;

    // System-level mixing decisions, drawn in a fixed order.
    const bool nonlinear = lv == 1 || (lv >= 2 && coin(rng));
    const bool forcing = lv == 1 || (lv >= 2 && coin(rng));
    const bool state_scaled = lv >= 1 && coin(rng);

    CorrelationStructure structure = CorrelationStructure::identity;
    if (lv == 2) {
        structure = CorrelationStructure::block;
    } else if (lv == 3) {
        structure = CorrelationStructure::cross_block;
    } else if (lv == 4) {
        structure = CorrelationStructure::global;
    } else if (lv >= 5) {
        const bool with_block = coin(rng);
        const bool with_cross = coin(rng);
        const bool with_global = coin(rng);
        if (with_global) {
            structure = CorrelationStructure::global;
        } else if (with_cross) {
            structure = CorrelationStructure::cross_block;
        } else if (with_block) {
            structure = CorrelationStructure::block;
        }
    }
    const bool jumps = lv == 5 || (lv > 5 && coin(rng));

    auto& diff = spec.diffusion;
    diff.base_vol.assign(d, 0.0);
    diff.state_scale.assign(d, 0.0);
    for (int i = 0; i < d; ++i) {
        if (lv >= 1) diff.base_vol[i] = uniform_in(rng, ranges::vol_lo, ranges::vol_hi);
        if (state_scaled) {
            diff.state_scale[i] = uniform_in(rng, ranges::state_scale_lo, ranges::state_scale_hi);
        }
    }

    spec.drift.resize(d);
    for (int i = 0; i < d; ++i) {
        DriftSpec& dr = spec.drift[i];
        const bool second = coin(rng);
        if (nonlinear) {
            dr.kind = second ? DriftKind::cubic_damped : DriftKind::tanh_saturating;
        } else {
            dr.kind = second ? DriftKind::linear_mean_reversion : DriftKind::constant;
        }
        dr.level_param = uniform_in(rng, ranges::level_lo, ranges::level_hi);
        dr.rate = uniform_in(rng, ranges::rate_lo, ranges::rate_hi);
        dr.forcing_frequency = uniform_in(rng, ranges::forcing_freq_lo, ranges::forcing_freq_hi);
        dr.forcing_phase = 2.0 * std::numbers::pi * rng.uniform();
        if (dr.forcing_phase >= 2.0 * std::numbers::pi) dr.forcing_phase = 0.0;
        const double amp = uniform_in(rng, 0.0, ranges::forcing_amp_fraction * diff.base_vol[i]);
        dr.forcing_amplitude = forcing ? amp : 0.0;
    }

    diff.correlation_structure = structure;
    diff.correlation = {sample_structured_correlation(structure, n_features, n_targets, rng)};
    diff.chol = cholesky(diff.correlation.entries);

    auto& jp = spec.jumps;
    jp.enabled = jumps;
    jp.intensity.assign(d, 0.0);
    jp.jump_mean.assign(d, 0.0);
    jp.jump_std.assign(d, 0.0);
    jp.common_jump_prob = 0.0;
    if (jumps) {
        for (int i = 0; i < d; ++i) {
            jp.intensity[i] = uniform_in(rng, ranges::jump_intensity_lo, ranges::jump_intensity_hi);
            jp.jump_mean[i] = uniform_in(rng, ranges::jump_mean_lo, ranges::jump_mean_hi);
            jp.jump_std[i] = uniform_in(rng, ranges::jump_std_lo, ranges::jump_std_hi);
        }
        jp.common_jump_prob = uniform_in(rng, 0.0, 1.0);
    }

    auto& rg = spec.regimes;
    rg.n_regimes = 2;
    rg.drift_offset.assign(2, std::vector<double>(d, 0.0));
    rg.logistic_slope.assign(d, 0.0);
    if (lv >= 6) {
        rg.enabled = true;
        rg.mechanism = lv >= 7 ? RegimeMechanism::logistic : RegimeMechanism::telegraph;
        for (auto& row : rg.drift_offset) {
            for (double& v : row) v = uniform_in(rng, ranges::offset_lo, ranges::offset_hi);
        }
        if (rg.mechanism == RegimeMechanism::telegraph) {
            rg.telegraph_rates = {uniform_in(rng, ranges::telegraph_lo, ranges::telegraph_hi),
                                  uniform_in(rng, ranges::telegraph_lo, ranges::telegraph_hi)};
        } else {
            rg.logistic_max_rate = uniform_in(rng, ranges::telegraph_lo, ranges::telegraph_hi);
            for (double& s : rg.logistic_slope) s = uniform_in(rng, ranges::slope_lo, ranges::slope_hi);
            rg.logistic_bias = uniform_in(rng, ranges::bias_lo, ranges::bias_hi);
        }
    }

    spec.init_state.resize(d);
    for (double& x : spec.init_state) x = uniform_in(rng, ranges::init_lo, ranges::init_hi);
    return spec;
}

std::vector<std::string> validate_spec(const SdeSystemSpec& spec) {
    std::vector<std::string> out;
    const int lv = spec.level.value();
    if (spec.n_targets < 1) out.emplace_back("n_targets must be >= 1");
    if (spec.n_features < 0) out.emplace_back("n_features must be >= 0");
    const auto d = static_cast<std::size_t>(std::max(0, spec.dims()));

    auto check_size = [&](std::size_t got, const char* field) {
        if (got != d) {
            out.push_back(std::string(field) + " has " + std::to_string(got) + " entries, expected D=" +
                          std::to_string(d));
            return false;
        }
        return true;
    };

    if (check_size(spec.drift.size(), "drift")) {
        for (std::size_t i = 0; i < d; ++i) {
            const DriftSpec& dr = spec.drift[i];
            const std::string at = "drift[" + std::to_string(i) + "]";
            if (!std::isfinite(dr.rate) || dr.rate < 0.0) out.push_back(at + ".rate must be finite and >= 0");
            if (!std::isfinite(dr.level_param)) out.push_back(at + ".level_param must be finite");
            if (!std::isfinite(dr.forcing_amplitude) || dr.forcing_amplitude < 0.0) {
                out.push_back(at + ".forcing_amplitude must be finite and >= 0");
            }
            if (!(dr.forcing_frequency > 0.0) || !std::isfinite(dr.forcing_frequency)) {
                out.push_back(at + ".forcing_frequency must be > 0");
            }
            if (!(dr.forcing_phase >= 0.0 && dr.forcing_phase < 2.0 * std::numbers::pi)) {
                out.push_back(at + ".forcing_phase must lie in [0, 2pi)");
            }
            const bool nonlinear =
                dr.kind == DriftKind::tanh_saturating || dr.kind == DriftKind::cubic_damped;
            if (lv < 1 && nonlinear) out.push_back(at + ": nonlinear drift requires level ≥ 1");
            if (lv < 1 && dr.forcing_amplitude != 0.0) out.push_back(at + ": forcing requires level ≥ 1");
        }
    }

    const auto& diff = spec.diffusion;
    if (check_size(diff.base_vol.size(), "diffusion.base_vol") &&
        check_size(diff.state_scale.size(), "diffusion.state_scale")) {
        for (std::size_t i = 0; i < d; ++i) {
            const std::string at = "[" + std::to_string(i) + "]";
            if (lv == 0) {
                if (diff.base_vol[i] != 0.0) out.push_back("diffusion.base_vol" + at + ": diffusion requires level ≥ 1");
                if (diff.state_scale[i] != 0.0) out.push_back("diffusion.state_scale" + at + ": diffusion requires level ≥ 1");
            } else {
                if (!(diff.base_vol[i] > 0.0) || !std::isfinite(diff.base_vol[i])) {
                    out.push_back("diffusion.base_vol" + at + " must be > 0");
                }
                if (!(diff.state_scale[i] >= 0.0) || !std::isfinite(diff.state_scale[i])) {
                    out.push_back("diffusion.state_scale" + at + " must be >= 0");
                }
            }
        }
    }

    const Matrix& corr = diff.correlation.entries;
    if (corr.rows() != static_cast<Eigen::Index>(d) || corr.cols() != static_cast<Eigen::Index>(d)) {
        out.emplace_back("diffusion.correlation must be D x D");
    } else {
        if (auto why = diff.correlation.violation(); !why.empty()) out.push_back(why);
        const int m = spec.n_features;
        const auto s = diff.correlation_structure;
        const int needed = s == CorrelationStructure::identity ? 0
                           : s == CorrelationStructure::block  ? 2
                           : s == CorrelationStructure::cross_block ? 3 : 4;
        if (lv < needed) {
            out.push_back(std::string(to_string(s)) + " correlation requires level ≥ " + std::to_string(needed));
        }
        if (s == CorrelationStructure::identity && !is_identity(corr)) {
            out.emplace_back("identity correlation structure with non-identity matrix");
        }
        if (s == CorrelationStructure::block && m > 0 &&
            corr.topRightCorner(m, static_cast<Eigen::Index>(d) - m).cwiseAbs().maxCoeff() != 0.0) {
            out.emplace_back("block correlation must have zero cross-block entries");
        }
        if (diff.chol.lower.rows() != corr.rows() || diff.chol.lower.cols() != corr.cols()) {
            out.emplace_back("diffusion.chol must be D x D");
        } else {
            const Matrix& l = diff.chol.lower;
            bool lower_ok = true;
            for (Eigen::Index i = 0; i < l.rows(); ++i) {
                if (!(l(i, i) > 0.0)) lower_ok = false;
                for (Eigen::Index j = i + 1; j < l.cols(); ++j) {
                    if (l(i, j) != 0.0) lower_ok = false;
                }
            }
            if (!lower_ok) out.emplace_back("diffusion.chol must be lower triangular with positive diagonal");
            if (reconstruction_error(diff.chol, corr) > kCholeskyTolerance) {
                out.emplace_back("diffusion.chol does not reproduce correlation");
            }
        }
    }

    const auto& jp = spec.jumps;
    if (jp.enabled && lv < 5) out.emplace_back("jumps require level ≥ 5");
    if (check_size(jp.intensity.size(), "jumps.intensity") &&
        check_size(jp.jump_mean.size(), "jumps.jump_mean") &&
        check_size(jp.jump_std.size(), "jumps.jump_std")) {
        for (std::size_t i = 0; i < d; ++i) {
            if (!(jp.intensity[i] >= 0.0) || !std::isfinite(jp.intensity[i])) {
                out.push_back("jumps.intensity[" + std::to_string(i) + "] must be >= 0");
            }
            if (!jp.enabled && jp.intensity[i] != 0.0) {
                out.push_back("jumps.intensity[" + std::to_string(i) + "] must be 0 when jumps are disabled");
            }
            if (!(jp.jump_std[i] >= 0.0) || !std::isfinite(jp.jump_std[i])) {
                out.push_back("jumps.jump_std[" + std::to_string(i) + "] must be >= 0");
            }
            if (!std::isfinite(jp.jump_mean[i])) {
                out.push_back("jumps.jump_mean[" + std::to_string(i) + "] must be finite");
            }
        }
    }
    if (!(jp.common_jump_prob >= 0.0 && jp.common_jump_prob <= 1.0)) {
        out.emplace_back("jumps.common_jump_prob must lie in [0, 1]");
    }

    const auto& rg = spec.regimes;
    if (rg.n_regimes != 2) out.emplace_back("regimes.n_regimes must be 2");
    if (rg.enabled) {
        if (rg.mechanism == RegimeMechanism::telegraph && lv < 6) {
            out.emplace_back("telegraph regimes require level ≥ 6");
        }
        if (rg.mechanism == RegimeMechanism::logistic && lv < 7) {
            out.emplace_back("logistic regimes require level ≥ 7");
        }
        if (rg.mechanism == RegimeMechanism::telegraph &&
            !(rg.telegraph_rates[0] > 0.0 && rg.telegraph_rates[1] > 0.0)) {
            out.emplace_back("regimes.telegraph_rates must be > 0");
        }
        if (rg.mechanism == RegimeMechanism::logistic && !(rg.logistic_max_rate > 0.0)) {
            out.emplace_back("regimes.logistic_max_rate must be > 0");
        }
    }
    if (rg.drift_offset.size() != 2) {
        out.emplace_back("regimes.drift_offset must have 2 rows");
    } else {
        check_size(rg.drift_offset[0].size(), "regimes.drift_offset[0]");
        check_size(rg.drift_offset[1].size(), "regimes.drift_offset[1]");
    }
    check_size(rg.logistic_slope.size(), "regimes.logistic_slope");

    if (check_size(spec.init_state.size(), "init_state")) {
        for (double x : spec.init_state) {
            if (!std::isfinite(x)) {
                out.emplace_back("init_state must be finite");
                break;
            }
        }
    }
    return out;
}

std::set<std::string> active_dynamics(const SdeSystemSpec& spec) {
    std::set<std::string> out{"drift"};
    for (double v : spec.diffusion.base_vol) {
        if (v > 0.0) out.insert("diffusion");
    }
    for (const auto& dr : spec.drift) {
        if (dr.kind == DriftKind::tanh_saturating || dr.kind == DriftKind::cubic_damped) {
            out.insert("nonlinear_drift");
        }
        if (dr.forcing_amplitude != 0.0) out.insert("forcing");
    }
    for (double s : spec.diffusion.state_scale) {
        if (s > 0.0) out.insert("state_scaled_vol");
    }
    switch (spec.diffusion.correlation_structure) {
        case CorrelationStructure::identity: break;
        // Richer structures contain the poorer ones.
        case CorrelationStructure::global: out.insert("global_correlation"); [[fallthrough]];
        case CorrelationStructure::cross_block: out.insert("cross_correlation"); [[fallthrough]];
        case CorrelationStructure::block: out.insert("block_correlation"); break;
    }
    if (spec.jumps.enabled) out.insert("jumps");
    if (spec.regimes.enabled) {
        // A logistic hazard with zero slope is the telegraph process.
        out.insert("regime_switching");
        if (spec.regimes.mechanism == RegimeMechanism::logistic) out.insert("state_dependent_regimes");
    }
    return out;
}

}  // namespace sdeu
