/*
 * Deterministic randomness. One master seed fans out into independent
 * streams addressed by (tag, counter), so simulations and attack trials
 * can be replayed or parallelized without changing results.
 *
 * Generator: xoshiro256**, seeded through splitmix64. Bounded draws use
 * rejection so results do not depend on the standard library.
 */
#pragma once

#include <cstdint>
#include <string_view>

namespace efid {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    static Rng from_seed(std::uint64_t seed) {
        Rng r;
        std::uint64_t sm = seed;
        for (auto& word : r.state_)
            word = splitmix64(sm);
        return r;
    }

    // Independent stream for a component (tag) and an index within it.
    static Rng stream(std::uint64_t master, std::string_view tag, std::uint64_t counter = 0) {
        std::uint64_t sm = master ^ fnv1a64(tag);
        std::uint64_t mixed = splitmix64(sm);
        sm = mixed ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        return from_seed(splitmix64(sm));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, bound), unbiased via rejection. bound must be nonzero.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0} / bound));
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) {
        return unit() < p;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

} // namespace efid
