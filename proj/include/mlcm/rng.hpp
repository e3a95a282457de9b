#pragma once

#include <cstdint>
#include <span>

namespace mlcm {

/// Deterministic 64-bit generator (splitmix64). Used everywhere instead of the
/// standard distributions so that identical seeds produce identical streams on
/// every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool bernoulli(double p) { return next_double() < p; }

    /// Unbiased integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Index sampled proportionally to the given nonnegative weights.
    int pick(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Generator for the substream identified by (a, b) under the given seed.
    /// The derivation is position independent: it depends only on the key values.
    static Rng for_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
        std::uint64_t s = mix64(seed + 0x9e3779b97f4a7c15ULL);
        s = mix64(s ^ (a + 0xbf58476d1ce4e5b9ULL));
        s = mix64(s ^ (b + 0x94d049bb133111ebULL));
        return Rng(s);
    }

private:
    std::uint64_t state_;
};

} // namespace mlcm
