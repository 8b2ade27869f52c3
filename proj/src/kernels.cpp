/*
 * Backend selection. AVX2 is used when the CPU reports it (and the popcnt
 * bit); EFID_KERNELS=scalar|avx2|auto overrides.
 */
#include "efid/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace efid::kernels {

#if defined(EFID_HAVE_AVX2_TU)
const Ops* avx2_impl(); // defined in kernels_avx2.cpp
#endif

const Ops* avx2() {
#if defined(EFID_HAVE_AVX2_TU)
    static const Ops* ops = []() -> const Ops* {
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt"))
            return avx2_impl();
        return nullptr;
    }();
    return ops;
#else
    return nullptr;
#endif
}

namespace {

const Ops* pick_default() {
    if (const char* env = std::getenv("EFID_KERNELS")) {
        std::string want(env);
        if (want == "scalar")
            return &scalar();
        if (want == "avx2" && avx2())
            return avx2();
        // fall through to auto for anything else
    }
    if (const Ops* v = avx2())
        return v;
    return &scalar();
}

const Ops*& active_slot() {
    static const Ops* current = pick_default();
    return current;
}

} // namespace

const Ops& active() {
    return *active_slot();
}

void select(std::string_view name) {
    if (name == "scalar") {
        active_slot() = &scalar();
    } else if (name == "avx2") {
        if (!avx2())
            throw std::runtime_error("avx2 kernels unavailable on this CPU/build");
        active_slot() = avx2();
    } else if (name == "auto") {
        active_slot() = avx2() ? avx2() : &scalar();
    } else {
        throw std::invalid_argument("unknown kernel backend: " + std::string(name));
    }
}

} // namespace efid::kernels
