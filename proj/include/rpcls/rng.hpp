#pragma once

#include <cstdint>
#include <limits>

namespace rpcls {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Combines a key with one more word into a new, well-mixed key.
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t word) noexcept {
    return mix64(key ^ mix64(word + 0x9E3779B97F4A7C15ULL));
}

/// Counter-based bit generator: the i-th output is a pure function of (key, i).
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace rpcls
