#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <vector>

#include "transsync/errors.hpp"

namespace transsync {

// splitmix64 finalizer, used to turn arbitrary integers into well-mixed seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic seed for a sub-stream. Hash-chains the root seed with a path
// of indices so that trials, grid points and methods get independent engines
// regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix_seed(root);
    for (std::uint64_t p : path) {
        s = mix_seed(s ^ mix_seed(p));
    }
    return s;
}

// Seeded random engine. Distributions are coded explicitly (instead of the
// std::*_distribution adaptors, whose output is implementation-defined) so
// that a given seed produces the same stream on every platform.
class RandomEngine {
public:
    explicit RandomEngine(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Standard normal via Box-Muller; consumes exactly two engine draws.
    double normal() {
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Unbiased uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw ContractViolation("RandomEngine::below requires n > 0");
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = gen_();
            if (r >= threshold) return r % n;
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Draws `count` distinct indices from [0, population), in draw order.
    std::vector<int> sample_without_replacement(int population, int count) {
        if (count < 0 || population < count)
            throw ContractViolation("sample_without_replacement: count out of range");
        std::vector<int> pool(static_cast<std::size_t>(population));
        for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(below(static_cast<std::uint64_t>(population - i))) + static_cast<std::size_t>(i);
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            out.push_back(pool[static_cast<std::size_t>(i)]);
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace transsync
