#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace powmesh {

// Deterministic PRNG for simulations. std::<distribution> types are not
// bit-stable across standard libraries, so sampling is done by hand on top
// of xoshiro256++ with splitmix64 seeding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of entropy.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n) via rejection (unbiased), n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Exponential variate with the given rate (mean 1/rate).
    double exponential(double rate) {
        double u;
        do { u = u01(); } while (u <= 0.0);
        return -std::log(u) / rate;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
};

/// Derives an independent stream from (seed, tag, index). Used so that e.g.
/// topology wiring, bandwidth sampling and per-miner mining clocks never
/// share a sequence, and results stay stable when one consumer draws more.
inline Rng rng_stream(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t x = seed ^ h;
    Rng::splitmix64(x);
    x ^= 0x632be59bd9b4e019ULL + index * 0x9e3779b97f4a7c15ULL;
    return Rng(x);
}

}  // namespace powmesh
