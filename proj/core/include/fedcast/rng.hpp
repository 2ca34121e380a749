#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fedcast {

/**
 * @brief SplitMix64 pseudo-random generator.
 *
 * The recurrence and output function are fully specified integer
 * arithmetic (Steele, Lea & Flood 2014), so a given seed yields the same
 * stream on every platform and standard library.  That property is what
 * makes whole experiment runs bit-reproducible, which std::mt19937 plus
 * std::normal_distribution cannot guarantee across toolchains.
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    /// Next 64 uniformly distributed bits.
    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double nextDouble() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double nextUniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * nextDouble();
    }

    /// Unbiased integer in [0, n); n must be positive.
    std::uint64_t nextBelow(std::uint64_t n) noexcept {
        // Rejection sampling over the largest multiple of n below 2^64.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    /**
     * @brief Standard normal deviate via Marsaglia's polar method.
     *
     * Chosen over Box-Muller because it needs only sqrt/log, whose
     * round-to-nearest results are identical across conforming libms,
     * keeping Gaussian streams bit-stable.
     */
    double nextGaussian() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * nextDouble() - 1.0;
            v = 2.0 * nextDouble() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit hash; used to turn channel/client names into stream tags.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/**
 * @brief Derives an independent child seed from a parent seed and a tag.
 *
 * Every consumer of randomness (noise per channel, shuffle per epoch,
 * client sampling per round, ...) draws from its own derived stream, so
 * adding or removing one consumer never perturbs the others.
 */
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) noexcept {
    SplitMix64 g(seed ^ (tag * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
    return g.next();
}

}  // namespace fedcast
