#pragma once

#include <cstdint>
#include <vector>

namespace relief {

// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
// <random> engines+distributions so that sampled sequences are identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Unbiased draw in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) {
        std::uint64_t threshold = (-n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform double in [0, 1).
    double uniform() { return (next() >> 11) * 0x1.0p-53; }

    double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Independent child stream; stable under reordering of sibling draws.
    Rng child(std::uint64_t tag) const {
        Rng mixer(state_ ^ (tag * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
        return Rng(mixer.next());
    }

private:
    std::uint64_t state_;
};

/// Stateless integer hash, for lattice noise. Same mixing as Rng::next.
inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9e3779b97f4a7c15ull + b + 0x7f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline double hash_unit(std::uint64_t a, std::uint64_t b) {
    return (hash_mix(a, b) >> 11) * 0x1.0p-53;
}

/// k distinct indices drawn uniformly from [0, n), returned sorted.
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k, Rng& rng);

} // namespace relief
