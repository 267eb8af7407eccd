#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srct::rng {

// splitmix64 finalizer; used to turn arbitrary 64-bit values into
// well-mixed seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives a child seed from a parent seed and a label. All randomness in
// the harness flows from one root seed through chains of derive() calls,
// so every stage is replayable in isolation.
inline std::uint64_t derive(std::uint64_t seed, std::string_view label) {
    return mix64(seed ^ fnv1a(label));
}

inline std::uint64_t derive(std::uint64_t seed, std::string_view a, std::string_view b) {
    return derive(derive(seed, a), b);
}

inline std::uint64_t derive(std::uint64_t seed, std::string_view a, std::uint64_t n) {
    return mix64(derive(seed, a) ^ mix64(n));
}

// Seeded generator with hand-rolled distributions. std::*_distribution is
// implementation-defined, which would break the byte-identical replay
// contract; everything here is pinned to mt19937_64 output.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; never zero, safe for log().
    double uniform_pos() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

    // Unbiased integer in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;  // 2^64 mod n
        std::uint64_t x = gen_();
        if (rem != 0) {
            const std::uint64_t limit = 0 - rem;  // 2^64 - rem
            while (x >= limit) x = gen_();
        }
        return x % n;
    }

    // Standard normal, Box-Muller (cosine branch only, no cached spare).
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

    // Uniform sample of k distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw std::invalid_argument("Rng::sample_indices: k exceeds n");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    // Index draw from a categorical distribution given cumulative weights.
    std::size_t categorical(const std::vector<double>& cumulative) {
        const double u = uniform();
        for (std::size_t i = 0; i < cumulative.size(); ++i) {
            if (u < cumulative[i]) return i;
        }
        return cumulative.size() - 1;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace srct::rng
