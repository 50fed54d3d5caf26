#pragma once

#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace xlwm {

// splitmix64 finalizer. Bijective on 64-bit integers; 0 is a fixed point.
// Every seed, shuffle and digest in this project goes through this function
// so that independent implementations can reproduce results bit-exactly.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// splitmix64 sequence generator: next() == mix64(state += golden-gamma).
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound). bound must be >= 1; plain modulo, the
    // tiny bias does not matter here and keeps the stream trivially portable.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        return next() % bound;
    }

private:
    std::uint64_t state_;
};

// Order-sensitive 64-bit digest of a byte string.
constexpr std::uint64_t fold64(std::uint64_t h, std::string_view bytes) noexcept {
    for (unsigned char b : bytes) {
        h = mix64(h ^ b);
    }
    return h;
}

// Fisher-Yates shuffle of [0..n-1] driven by a SplitMix64 stream seeded with
// `seed`: for i from n-1 down to 1, swap element i with element next() % (i+1).
inline std::vector<std::uint32_t> shuffled_identity(std::uint64_t seed, std::size_t n) {
    std::vector<std::uint32_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0u);
    SplitMix64 rng(seed);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(ids[i], ids[j]);
    }
    return ids;
}

}  // namespace xlwm
