/*
 * Word-level bit kernels for m-bit filters.
 *
 * Every kernel exists in a portable scalar form and, on x86-64 with AVX2,
 * a vectorized form. The active set is chosen once at startup from CPUID
 * and can be overridden with select() (used by the equivalence tests and
 * the EFID_KERNELS environment variable).
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace efid::kernels {

struct Ops {
    // dst[i] |= src[i]
    void (*or_accum)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
    // true iff every set bit of sub is set in sup: (sub & ~sup) == 0
    bool (*is_subset)(const std::uint64_t* sub, const std::uint64_t* sup, std::size_t n);
    std::uint64_t (*popcount)(const std::uint64_t* w, std::size_t n);
    // popcount(a & b), no materialized temporary
    std::uint64_t (*and_popcount)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
    bool (*equal)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
    const char* name;
};

const Ops& scalar();

// nullptr when the CPU (or build) lacks AVX2.
const Ops* avx2();

// The backend in use; defaults to the best available.
const Ops& active();

// Force a backend: "scalar", "avx2" or "auto". Throws std::invalid_argument
// for unknown names, std::runtime_error if the backend is unavailable.
void select(std::string_view name);

} // namespace efid::kernels
