#pragma once

#include <cstdint>
#include <random>

namespace adacast {

/// Deterministic uniform stream. Wraps mt19937_64 (bit-exact across
/// platforms) and derives doubles directly from the raw output instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is irrelevant at simulation scales (n << 2^64)
        return gen_() % n;
    }

    /// Derives an independent sub-stream from (seed, salt).
    static Rng stream(std::uint64_t seed, std::uint64_t salt) {
        return Rng(splitmix64(seed + 0x9e3779b97f4a7c15ULL * (salt + 1)));
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 gen_;
};

} // namespace adacast
