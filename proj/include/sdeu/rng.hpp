#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace sdeu {

/**
 * Counter-based, splittable random stream.
 *
 * A stream is identified by a root seed plus a path of 64-bit labels
 * (system index, path index, purpose tag, ...). The path is hashed into a
 * 128-bit stream identity which keys a Philox4x32-10 block cipher; draws are
 * the cipher applied to an incrementing counter. Equal (root_seed, path)
 * pairs therefore reproduce the same sequence regardless of which thread
 * evaluates them or in what order sibling streams are consumed.
 *
 * A single instance is not safe to advance from two threads at once; copy or
 * derive instead.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    explicit RngStream(std::uint64_t root_seed);

    [[nodiscard]] std::uint64_t root_seed() const noexcept { return root_seed_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    /// Child stream whose path is this path followed by `label`.
    [[nodiscard]] RngStream derive(std::uint64_t label) const;

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53 bits of resolution.
    double uniform();
    /// Standard normal (Box-Muller, second variate cached).
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // UniformRandomBitGenerator surface.
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

private:
    RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> path);
    void refill();

    std::uint64_t root_seed_;
    std::vector<std::uint64_t> path_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t stream_hi_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> block_{};
    int block_pos_ = 2;
    std::optional<double> cached_normal_;
};

/// Free-function form of RngStream::derive.
[[nodiscard]] inline RngStream derive_stream(const RngStream& parent, std::uint64_t label) {
    return parent.derive(label);
}

/// Purpose tags used when splitting a per-system stream.
namespace purpose {
inline constexpr std::uint64_t spec = 0x5350;        // "SP"
inline constexpr std::uint64_t history = 0x4849;     // "HI"
inline constexpr std::uint64_t oracle = 0x4f52;      // "OR"
inline constexpr std::uint64_t rebranch = 0x5242;    // "RB"
inline constexpr std::uint64_t historical = 0x4853;  // "HS"
inline constexpr std::uint64_t dcc = 0x4443;         // "DC"
}  // namespace purpose

namespace dist {
struct Normal {};
struct StudentT {
    double nu;
};
struct Poisson {
    double lambda;
};
struct Exponential {
    double rate;
};
struct Uniform {
    double a;
    double b;
};
struct ChiSquare {
    double nu;
};
}  // namespace dist

using Distribution = std::variant<dist::Normal, dist::StudentT, dist::Poisson, dist::Exponential,
                                  dist::Uniform, dist::ChiSquare>;

/// One draw from `kind`. Throws InvalidParameter on an invalid law.
double sample_standard(const Distribution& kind, RngStream& rng);

/// Gamma(shape, 1) via Marsaglia-Tsang.
double sample_gamma(double shape, RngStream& rng);

}  // namespace sdeu
