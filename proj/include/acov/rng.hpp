#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (seed, stream, index, counter), so any
// time step of any path can be regenerated without replaying the ones before
// it. Two paths that use the same (seed, stream, index) key see bit-identical
// draws, which is how coupled paths share innovations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace acov {

/// splitmix64 finalizer (Steele, Lea & Flood). Constants are fixed:
///   x += 0x9E3779B97F4A7C15
///   x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
///   x = (x ^ (x >> 27)) * 0x94D049BB133111EB
///   x =  x ^ (x >> 31)
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Replicate seed derivation used by the estimators and the harness:
///   derive_seed(s, a, b) = splitmix64(splitmix64(s ^ splitmix64(a)) ^ b)
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(a)) ^ b);
}

/// Named streams. Values are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    innovation = 1,
    history_innovation = 2,
    w_chain = 3,
    history_w_chain = 4,
    orthogonal = 5,
    init = 6,
    history_init = 7,
    reference = 8,
};

/// Maps a signed time index (burn-in steps are negative) onto the key space.
constexpr std::uint64_t time_key(std::int64_t t) noexcept {
    return static_cast<std::uint64_t>(t) ^ 0x8000000000000000ULL;
}

/// A UniformRandomBitGenerator over one (seed, stream, index) key.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, Stream stream, std::uint64_t index) noexcept
        : key_(splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) ^
                          splitmix64(index + 0x632BE59BD9B4E019ULL))) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        return splitmix64(key_ + 0xD1B54A32D192ED03ULL * (++counter_));
    }

    /// Uniform on (0, 1); never returns 0 so it is safe under log().
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi].
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Rademacher sign.
    double sign() noexcept { return ((*this)() >> 63) ? 1.0 : -1.0; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double theta = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace acov
