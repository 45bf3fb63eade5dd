#pragma once

#include <cmath>
#include <cstdint>

namespace sfh {

// splitmix64, used both as a stream-derivation mixer and to seed xoshiro.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna, public domain reference implementation).
// Used instead of std::mt19937_64 so that streams are reproducible
// independently of the standard library.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform double in (0,1], 53-bit resolution, never exactly 0
    double uniform() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Standard normal variates via Box-Muller with a one-value cache.
// Draw order is fixed, so a given seed always yields the same sequence.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = rng_.uniform();
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

private:
    Xoshiro256 rng_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Counter-based substream derivation: one root seed plus a key
// (purpose tag, degree, order, replicate) maps to an independent stream.
inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t tag,
                                   std::uint64_t a = 0, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    std::uint64_t state = root;
    splitmix64(state);
    state ^= 0xd1342543de82ef95ULL * (tag + 1);
    splitmix64(state);
    state ^= 0xaf251af3b0f025b5ULL * (a + 1);
    splitmix64(state);
    state ^= 0x9e6c63d0a9dde2a3ULL * (b + 1);
    splitmix64(state);
    state ^= 0xc2b2ae3d27d4eb4fULL * (c + 1);
    return splitmix64(state);
}

} // namespace sfh
