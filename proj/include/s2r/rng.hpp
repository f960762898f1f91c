#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace s2r {

// Deterministic, splittable RNG. Streams are derived from a master seed and a
// list of 64-bit labels (phase id, simulator index, node key, ...), so any
// worker scheduling draws identical values for the same logical stream.
// Distributions are implemented here rather than taken from <random> because
// libstdc++/libc++ do not guarantee identical sequences.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    Rng() : Rng(0x853c49e6748fea9bULL) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Derive a child stream from labels; order-sensitive, collision-resistant
    // enough for experiment bookkeeping.
    Rng derive(std::initializer_list<std::uint64_t> labels) const {
        std::uint64_t h = s_[0] ^ 0x2545f4914f6cdd1dULL;
        for (std::uint64_t v : labels) {
            std::uint64_t x = v + 0x9e3779b97f4a7c15ULL;
            h ^= splitmix64(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h = splitmix64(h);
        }
        std::uint64_t mix = h ^ s_[1] ^ (s_[2] << 1) ^ (s_[3] >> 1);
        return Rng(mix);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;  // xoshiro256**
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), n >= 1. Rejection keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t bound = n * ((~std::uint64_t{0}) / n);
        for (;;) {
            std::uint64_t x = next_u64();
            if (x < bound) return x % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

// Phase labels for stream derivation. Values are part of the reproducibility
// contract: changing them changes every report.
enum class Phase : std::uint64_t {
    SampleSimulators = 1,
    DfsDistribution = 2,
    Consensus = 3,
    TdEliminate = 4,
    EstimateVstar = 5,
    LearnOnSimulators = 6,
    Deploy = 7,
    RealEnv = 8,
    MetaEval = 9,
    BuildClass = 10,
    Diagnostic = 11,
};

inline std::uint64_t phase_id(Phase p) { return static_cast<std::uint64_t>(p); }

}  // namespace s2r
