#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace rpcls {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// In-place unnormalized Walsh-Hadamard transform (Sylvester ordering).
/// Length must be a power of two. Applying it twice multiplies by the length.
inline void fwht_inplace(std::span<double> data) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fwht_inplace: length must be a power of two");
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = data[j];
                const double b = data[j + h];
                data[j] = a + b;
                data[j + h] = a - b;
            }
        }
    }
}

}  // namespace rpcls
