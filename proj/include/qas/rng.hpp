#pragma once

#include <cstdint>
#include <random>

namespace qas {

/// SplitMix64 finalizer. Used both as a stand-alone mixer and as the seed
/// derivation primitive below.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed derivation: one splitmix round folds a salt into a base seed.
/// Derivations chain, so any leaf seed is reproducible from the master seed
/// and its coordinates alone:
///
///   instance seed = derive(derive(master, n), alpha)
///   cell seed     = derive(derive(derive(instance, d_code), tau_bits), purpose)
///
/// d_code is the Hamming distance, or ~0 for an unbiased cell; tau_bits is
/// the IEEE-754 bit pattern of tau in microseconds.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64(base ^ splitmix64(salt));
}

/// Purpose tags for per-cell streams.
enum class SeedPurpose : std::uint64_t {
    instance = 1,
    bias = 2,
    shots = 3,
};

constexpr std::uint64_t kUnbiasedCode = ~0ull;

inline std::uint64_t tau_bits(double tau_us) {
    static_assert(sizeof(double) == sizeof(std::uint64_t));
    std::uint64_t bits = 0;
    __builtin_memcpy(&bits, &tau_us, sizeof(bits));
    return bits;
}

inline std::uint64_t instance_seed(std::uint64_t master, int n, int alpha) {
    return derive_seed(derive_seed(master, static_cast<std::uint64_t>(n)),
                       static_cast<std::uint64_t>(alpha));
}

inline std::uint64_t cell_seed(std::uint64_t inst_seed, std::uint64_t d_code,
                               double tau_us, SeedPurpose purpose) {
    return derive_seed(
        derive_seed(derive_seed(inst_seed, d_code), tau_bits(tau_us)),
        static_cast<std::uint64_t>(purpose));
}

/// Thin wrapper around mt19937_64 that only consumes raw 64-bit outputs, so
/// streams are bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform draw in [0, bound) by rejection; bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~0ull - ~0ull % bound;
        std::uint64_t r = next();
        while (r >= limit)
            r = next();
        return r % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double canonical() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

} // namespace qas
