#include "sdeu/rng.hpp"

#include "sdeu/error.hpp"

#include <cmath>
#include <numbers>

namespace sdeu {
namespace {

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Two independent order-sensitive hashes of (root, path): one keys the cipher,
// the other fills the upper half of the counter block.
struct StreamId {
    std::uint64_t key;
    std::uint64_t hi;
};

StreamId hash_path(std::uint64_t root, const std::vector<std::uint64_t>& path) {
    std::uint64_t a = mix64(root ^ 0x243f6a8885a308d3ull);
    std::uint64_t b = mix64(root ^ 0x13198a2e03707344ull);
    for (std::uint64_t label : path) {
        a = mix64(a ^ mix64(label + 0x9e3779b97f4a7c15ull));
        b = mix64(b + mix64(label ^ 0xa4093822299f31d0ull) * 0x9e3779b97f4a7c15ull);
    }
    return {a, b};
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo32(m0, c[0], hi0, lo0);
        mulhilo32(m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += w0;
        k[1] += w1;
    }
    return c;
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed) : RngStream(root_seed, {}) {}

RngStream::RngStream(std::uint64_t root_seed, std::vector<std::uint64_t> path)
    : root_seed_(root_seed), path_(std::move(path)) {
    const StreamId id = hash_path(root_seed_, path_);
    key_ = {static_cast<std::uint32_t>(id.key), static_cast<std::uint32_t>(id.key >> 32)};
    stream_hi_ = id.hi;
}

RngStream RngStream::derive(std::uint64_t label) const {
    std::vector<std::uint64_t> child = path_;
    child.push_back(label);
    return RngStream(root_seed_, std::move(child));
}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_hi_), static_cast<std::uint32_t>(stream_hi_ >> 32)};
    const auto out = philox4x32_10(ctr, key_);
    block_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    block_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++counter_;
    block_pos_ = 0;
}

std::uint64_t RngStream::next_u64() {
    if (block_pos_ >= 2) refill();
    return block_[block_pos_++];
}

double RngStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (cached_normal_) {
        const double z = *cached_normal_;
        cached_normal_.reset();
        return z;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    if (n == 0) throw InvalidParameter("below(0): empty range");
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<unsigned __int128>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double sample_gamma(double shape, RngStream& rng) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidParameter("gamma shape must be > 0");
    if (shape < 1.0) {
        const double g = sample_gamma(shape + 1.0, rng);
        return g * std::pow(rng.uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = rng.uniform();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

namespace {

double sample_poisson(double lambda, RngStream& rng) {
    if (lambda == 0.0) return 0.0;
    if (lambda < 10.0) {
        const double limit = std::exp(-lambda);
        double p = 1.0;
        std::uint64_t k = 0;
        do {
            ++k;
            p *= rng.uniform();
        } while (p > limit);
        return static_cast<double>(k - 1);
    }
    // PTRS transformed rejection (Hoermann 1993).
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return k;
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -lambda + k * loglam - std::lgamma(k + 1.0)) {
            return k;
        }
    }
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double sample_standard(const Distribution& kind, RngStream& rng) {
    return std::visit(
        Overloaded{
            [&](const dist::Normal&) { return rng.normal(); },
            [&](const dist::StudentT& d) {
                if (!(d.nu > 0.0)) throw InvalidParameter("student_t requires nu > 0");
                const double chi2 = 2.0 * sample_gamma(0.5 * d.nu, rng);
                const double z = rng.normal();
                return z / std::sqrt(chi2 / d.nu);
            },
            [&](const dist::Poisson& d) {
                if (!(d.lambda >= 0.0) || !std::isfinite(d.lambda)) {
                    throw InvalidParameter("poisson requires lambda >= 0");
                }
                return sample_poisson(d.lambda, rng);
            },
            [&](const dist::Exponential& d) {
                if (!(d.rate > 0.0)) throw InvalidParameter("exponential requires rate > 0");
                return -std::log(rng.uniform()) / d.rate;
            },
            [&](const dist::Uniform& d) {
                if (!(d.a < d.b)) throw InvalidParameter("uniform requires a < b");
                return d.a + (d.b - d.a) * rng.uniform();
            },
            [&](const dist::ChiSquare& d) {
                if (!(d.nu > 0.0)) throw InvalidParameter("chi_square requires nu > 0");
                return 2.0 * sample_gamma(0.5 * d.nu, rng);
            },
        },
        kind);
}

}  // namespace sdeu
