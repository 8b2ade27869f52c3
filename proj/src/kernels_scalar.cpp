/*
 * Scalar reference kernels. These are the semantics the SIMD variants are
 * tested against; keep them obviously correct.
 */
#include "efid/kernels.hpp"

#include <bit>

namespace efid::kernels {

namespace {

void or_accum_scalar(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        dst[i] |= src[i];
}

bool is_subset_scalar(const std::uint64_t* sub, const std::uint64_t* sup, std::size_t n) {
    std::uint64_t stray = 0;
    for (std::size_t i = 0; i < n; ++i)
        stray |= sub[i] & ~sup[i];
    return stray == 0;
}

std::uint64_t popcount_scalar(const std::uint64_t* w, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += static_cast<std::uint64_t>(std::popcount(w[i]));
    return total;
}

std::uint64_t and_popcount_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    return total;
}

bool equal_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t diff = 0;
    for (std::size_t i = 0; i < n; ++i)
        diff |= a[i] ^ b[i];
    return diff == 0;
}

} // namespace

const Ops& scalar() {
    static const Ops ops{
        or_accum_scalar, is_subset_scalar, popcount_scalar,
        and_popcount_scalar, equal_scalar, "scalar",
    };
    return ops;
}

} // namespace efid::kernels
