#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace lsap {

// All randomized behavior in the pipeline flows through these helpers rather
// than <random> distributions, whose output is implementation-defined. The
// mt19937_64 engine itself is specified bit-for-bit by the standard, so
// drawing from the raw engine keeps every artifact reproducible across
// compilers and platforms.

using Rng = std::mt19937_64;

// FNV-1a, used for seed derivation and content checksums.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline uint64_t mix_seed(uint64_t seed, std::string_view tag) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((seed >> (8 * i)) & 0xff);
    return fnv1a64(tag, fnv1a64(std::string_view(buf, 8)));
}

// Uniform integer in [0, n) by rejection; unbiased and portable.
inline uint64_t rand_below(Rng& rng, uint64_t n) {
    if (n == 0) throw std::invalid_argument("rand_below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

inline double rand_unit(Rng& rng) {
    // 53 random bits -> [0, 1)
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline float rand_normal(Rng& rng, float mean = 0.0f, float stddev = 1.0f) {
    // Box-Muller; one value per call keeps the draw sequence simple to reason about.
    double u1 = rand_unit(rng);
    double u2 = rand_unit(rng);
    while (u1 <= 1e-12) u1 = rand_unit(rng);
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + stddev * static_cast<float>(z);
}

// Fisher-Yates with explicit draws; deterministic wherever mt19937_64 is.
template <typename T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rand_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Uniform sample of k indices from [0, n) without replacement, in draw order.
inline std::vector<size_t> sample_indices(Rng& rng, size_t n, size_t k) {
    if (k > n) throw std::invalid_argument("sample_indices: k exceeds n");
    std::vector<size_t> pool(n);
    for (size_t i = 0; i < n; ++i) pool[i] = i;
    for (size_t i = 0; i < k; ++i) {
        size_t j = i + static_cast<size_t>(rand_below(rng, n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace lsap
