#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace shellgate {

// xoshiro256** seeded through splitmix64. Self-contained so that seeded
// results are identical across compilers and platforms, which std::shuffle
// and std::uniform_int_distribution do not guarantee.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    // Decorrelated stream, e.g. per fold or per tree.
    Rng(uint64_t seed, uint64_t stream) : Rng(mix(seed, stream)) {}

    uint64_t next() {
        const uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound).
    uint64_t below(uint64_t bound) {
        if (bound <= 1) return 0;
        const uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

    // [0, 1) with 53 random bits.
    double real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * real(); }

    double normal() {
        // Box-Muller; spare value discarded to keep the stream position simple.
        double u1 = real(), u2 = real();
        while (u1 <= 0.0) u1 = real();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    bool chance(double p) { return real() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<size_t>(below(v.size()))];
    }

    static uint64_t mix(uint64_t a, uint64_t b) {
        uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
        return splitmix64(x);
    }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static uint64_t splitmix64(uint64_t&& x) {
        uint64_t v = x;
        return splitmix64(v);
    }
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace shellgate
