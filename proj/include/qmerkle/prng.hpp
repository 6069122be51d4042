#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace qmerkle {

/// 64-bit finalizer (splitmix64). Stateless; the basis of every random
/// value produced in this library, so results are identical across
/// platforms and standard-library implementations.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Combines seed material into a fresh 64-bit seed.
/// derive_seed(a, b, c) = mix64(mix64(mix64(H0 ^ a) ^ b) ^ c) with
/// H0 = 0x243f6a8885a308d3. Documented in the README so external tools
/// can reproduce per-trial seeds bit-exactly.
inline constexpr std::uint64_t seed_root() noexcept { return 0x243f6a8885a308d3ull; }

template <typename... Parts>
constexpr std::uint64_t derive_seed(Parts... parts) noexcept {
    std::uint64_t h = seed_root();
    ((h = mix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
}

/// Deterministic counter-based generator (splitmix64 stream).
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform draw from [0, n) by rejection; exact, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: empty range");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t u = next();
            if (u >= threshold) return u % n;
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = unit(), u2 = unit();
        while (u1 <= 0.0) u1 = unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Fisher-Yates shuffle.
    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Keyed PRF stream: value k of the function indexed by (seed, tag, x).
/// Lazily defines a random function without materializing a table.
inline std::uint64_t prf_word(std::uint64_t seed, std::uint64_t tag, std::uint64_t x,
                              std::uint64_t counter) noexcept {
    return mix64(mix64(mix64(mix64(seed ^ seed_root()) ^ tag) ^ x) + counter);
}

/// Uniform value in [0, n) from the PRF stream (rejection over the stream).
inline std::uint64_t prf_below(std::uint64_t seed, std::uint64_t tag, std::uint64_t x,
                               std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("prf_below: empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (std::uint64_t counter = 0;; ++counter) {
        const std::uint64_t u = prf_word(seed, tag, x, counter);
        if (u >= threshold) return u % n;
    }
}

} // namespace qmerkle
