/*
 * AVX2 kernels. 256-bit lanes cover four filter words per step; tails fall
 * back to the scalar loop. Popcounts use the nibble-LUT + psadbw reduction.
 *
 * This translation unit is compiled with -mavx2 -mpopcnt and must only be
 * entered after a runtime CPUID check (see kernels.cpp).
 */
#include "efid/kernels.hpp"

#include <bit>
#include <immintrin.h>

namespace efid::kernels {

namespace {

void or_accum_avx2(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_or_si256(d, s));
    }
    for (; i < n; ++i)
        dst[i] |= src[i];
}

bool is_subset_avx2(const std::uint64_t* sub, const std::uint64_t* sup, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i lo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sub + i));
        __m256i hi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sup + i));
        // CF of vptest: ((~sup) & sub) == 0
        if (!_mm256_testc_si256(hi, lo))
            return false;
    }
    std::uint64_t stray = 0;
    for (; i < n; ++i)
        stray |= sub[i] & ~sup[i];
    return stray == 0;
}

// Per-byte popcount of v via two 4-bit table lookups.
inline __m256i popcount_bytes(__m256i v) {
    const __m256i lut = _mm256_setr_epi8(
        0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
        0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0f);
    __m256i lo = _mm256_and_si256(v, low_mask);
    __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    return _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
}

std::uint64_t popcount_avx2(const std::uint64_t* w, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(w + i));
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(popcount_bytes(v), _mm256_setzero_si256()));
    }
    alignas(32) std::uint64_t parts[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(parts), acc);
    std::uint64_t total = parts[0] + parts[1] + parts[2] + parts[3];
    for (; i < n; ++i)
        total += static_cast<std::uint64_t>(_mm_popcnt_u64(w[i]));
    return total;
}

std::uint64_t and_popcount_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i v = _mm256_and_si256(x, y);
        acc = _mm256_add_epi64(acc, _mm256_sad_epu8(popcount_bytes(v), _mm256_setzero_si256()));
    }
    alignas(32) std::uint64_t parts[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(parts), acc);
    std::uint64_t total = parts[0] + parts[1] + parts[2] + parts[3];
    for (; i < n; ++i)
        total += static_cast<std::uint64_t>(_mm_popcnt_u64(a[i] & b[i]));
    return total;
}

bool equal_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        __m256i d = _mm256_xor_si256(x, y);
        if (!_mm256_testz_si256(d, d))
            return false;
    }
    std::uint64_t diff = 0;
    for (; i < n; ++i)
        diff |= a[i] ^ b[i];
    return diff == 0;
}

} // namespace

const Ops* avx2_impl();

const Ops* avx2_impl() {
    static const Ops ops{
        or_accum_avx2, is_subset_avx2, popcount_avx2,
        and_popcount_avx2, equal_avx2, "avx2",
    };
    return &ops;
}

} // namespace efid::kernels
