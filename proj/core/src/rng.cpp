#include "reliefkit/rng.hpp"

#include <algorithm>

namespace relief {

std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k, Rng& rng) {
    if (k > n) k = n;
    // Partial Fisher-Yates over an index array, then sort for stable downstream order.
    std::vector<std::uint32_t> pool(n);
    for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
    for (std::uint32_t i = 0; i < k; ++i) {
        std::uint32_t j = i + static_cast<std::uint32_t>(rng.bounded(n - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<std::uint32_t> out(pool.begin(), pool.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace relief
