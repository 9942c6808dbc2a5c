#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace edgefactor {

// SplitMix64. Fully specified here (no standard-library distributions), so
// every consumer — bootstrap replicates, the synthetic generator — produces
// identical streams across platforms, runs, and thread counts.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits.
    double next_double() { return double(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound). Debiased via rejection on the low multiply bits.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1)
            return 0;
        while (true) {
            std::uint64_t x = next();
            __uint128_t m = __uint128_t(x) * __uint128_t(bound);
            std::uint64_t lo = std::uint64_t(m);
            if (lo >= bound || lo >= std::uint64_t(-bound) % bound)
                return std::uint64_t(m >> 64);
        }
    }

    // Inclusive range.
    long long uniform_int(long long lo, long long hi) {
        return lo + (long long)below(std::uint64_t(hi - lo + 1));
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream key from structured coordinates, e.g.
// (seed, replicate) or (seed, location, year, index). Order-sensitive.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545f4914f6cdd1dull;
    for (std::uint64_t p : parts) {
        h ^= p + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        SplitMix64 s(h);
        h = s.next();
    }
    return h;
}

// Knuth's product method; fine for the small rates the generator uses.
inline int sample_poisson(SplitMix64& rng, double lambda) {
    if (lambda <= 0.0)
        return 0;
    double limit = std::exp(-lambda);
    double p = 1.0;
    int k = 0;
    do {
        ++k;
        p *= rng.next_double();
    } while (p > limit);
    return k - 1;
}

// Geometric on {0, 1, 2, ...} with success probability p.
inline int sample_geometric(SplitMix64& rng, double p) {
    if (p >= 1.0)
        return 0;
    double u = rng.next_double();
    if (u <= 0.0)
        u = 0x1.0p-53;
    return int(std::floor(std::log(u) / std::log1p(-p)));
}

} // namespace edgefactor
