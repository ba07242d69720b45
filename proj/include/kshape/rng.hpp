#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace kshape {

// splitmix64 step; used to derive independent per-item seeds from one base
// seed so generation order (or parallel generation) cannot change results.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

// Deterministic random source. The engine is std::mt19937_64, whose constants
// are fixed by the C++ standard, and every variate transform below is written
// out explicitly; std::*_distribution is avoided because its output is not
// specified across standard library implementations.
class rng {
  public:
    explicit rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1): top 53 bits of one engine draw.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller; two engine draws per variate.
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]; keeps log() finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform integer in [lo, hi], both inclusive.
    int int_in(int lo, int hi) {
        const int span = hi - lo + 1;
        int k = static_cast<int>(uniform() * span);
        if (k >= span) k = span - 1;
        return lo + k;
    }

    // Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

    // Fisher-Yates shuffle, driven by index() to stay engine-portable.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace kshape
