#include "rmaccess/transform.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace rmaccess {

CVec fwht_flipped(CVec x, std::uint64_t* mult_count) {
    const std::size_t n = x.size();
    if (n == 0 || !std::has_single_bit(n))
        throw std::invalid_argument("transform length must be a power of two");

    // Complementing every s-bit index reverses the order, turning the flipped
    // kernel into the natural-order butterfly on the reversed input.
    std::reverse(x.begin(), x.end());
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const auto a = x[j];
                const auto b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
        }
    }
    if (mult_count) *mult_count += static_cast<std::uint64_t>(std::bit_width(n) - 1) * n;
    return x;
}

}  // namespace rmaccess
