#include "verix/simd.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace verix::simd {

#ifdef VERIX_HAVE_AVX2
extern const KernelTable kAvx2Table;
#endif

namespace {

bool cpu_has_avx2() {
#if defined(VERIX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* select_default() {
    const KernelTable* avx2 = avx2_kernels();
    if (const char* env = std::getenv("VERIX_SIMD")) {
        const std::string choice{env};
        if (choice == "scalar") return &scalar_kernels();
        if (choice == "avx2" && avx2 != nullptr) return avx2;
    }
    return avx2 != nullptr ? avx2 : &scalar_kernels();
}

const KernelTable*& current() {
    static const KernelTable* table = select_default();
    return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
#ifdef VERIX_HAVE_AVX2
    static const bool supported = cpu_has_avx2();
    return supported ? &kAvx2Table : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active() { return *current(); }

Isa active_isa() { return current()->isa; }

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

void force_isa(Isa isa) {
    if (isa == Isa::Scalar) {
        current() = &scalar_kernels();
        return;
    }
    const KernelTable* avx2 = avx2_kernels();
    if (avx2 == nullptr) throw std::runtime_error("AVX2 kernels unavailable on this host");
    current() = avx2;
}

}  // namespace verix::simd
