#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, arm, pull index), so a reward sequence does not depend on how
// pulls of different arms are interleaved or on which thread runs them.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rrmab {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

/// Seed for replication `rep` of an experiment started from `base`.
inline constexpr std::uint64_t replication_seed(std::uint64_t base, std::uint64_t rep) noexcept {
    return hash_combine(splitmix64(base), rep);
}

/// Maps 64 random bits to a double in (0, 1].
inline double unit_open_closed(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw keyed by (seed, arm, pull). Box-Muller on two
/// independent counter hashes.
inline double gaussian_at(std::uint64_t seed, std::uint64_t arm, std::uint64_t pull) noexcept {
    const std::uint64_t key = hash_combine(hash_combine(seed, arm), pull);
    const double u1 = unit_open_closed(splitmix64(key));
    const double u2 = unit_open_closed(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Small sequential generator for harness-level choices (random profiles,
/// random instances). Not used for rewards.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        return splitmix64(state_++);
    }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1ULL;
        if (span == 0) return static_cast<std::int64_t>(next());
        // reject the short tail so every residue is equally likely
        const std::uint64_t limit = (~0ULL) - ((~0ULL) % span);
        std::uint64_t r = next();
        while (r >= limit) r = next();
        return lo + static_cast<std::int64_t>(r % span);
    }

    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace rrmab
