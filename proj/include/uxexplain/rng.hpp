// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace uxexplain::rng {

/// splitmix64 finalizer; decorrelates structured seed material.
constexpr uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr uint64_t fnv_byte(uint64_t h, uint8_t b) { return (h ^ b) * kFnvPrime; }

constexpr uint64_t fnv_u64(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h = fnv_byte(h, static_cast<uint8_t>(v >> (8 * i)));
    }
    return h;
}

inline uint64_t fnv_str(uint64_t h, std::string_view s) {
    for (unsigned char c : s) {
        h = fnv_byte(h, c);
    }
    return fnv_byte(h, 0x1f); // part separator, so ("ab","c") != ("a","bc")
}

} // namespace detail

/// Child seed derived from a parent seed plus string tags. Every record,
/// tree, and method gets its own stream keyed this way, so evaluation
/// order and thread count cannot change results.
inline uint64_t derive(uint64_t seed, std::string_view tag) {
    return mix(detail::fnv_str(detail::fnv_u64(detail::kFnvOffset, seed), tag));
}

template <typename... Tags>
uint64_t derive(uint64_t seed, std::string_view tag, Tags... rest) {
    return derive(derive(seed, tag), rest...);
}

/// Deterministic uniform source. Wraps mt19937_64 with hand-coded draw
/// helpers; std::uniform_*_distribution output is not pinned down by the
/// standard and would drift across library versions.
class Stream {
public:
    explicit Stream(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    /// Unbiased integer in [0, n). n must be > 0.
    uint64_t below(uint64_t n) {
        assert(n > 0);
        const uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    size_t index(size_t n) { return static_cast<size_t>(below(n)); }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return unit() < p; }

    /// k distinct indices from [0, n), uniform, in selection order.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        if (k > n) k = n;
        std::vector<size_t> pool(n);
        for (size_t i = 0; i < n; ++i) pool[i] = i;
        for (size_t i = 0; i < k; ++i) {
            std::swap(pool[i], pool[i + index(n - i)]);
        }
        pool.resize(k);
        return pool;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace uxexplain::rng
