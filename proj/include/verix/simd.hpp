#pragma once

// Inner-loop kernels shared by forward evaluation, bound propagation and
// leaf encoding. Each kernel has a scalar reference implementation and,
// where the target supports it, an AVX2/FMA variant. The variant is chosen
// once per process from CPUID; VERIX_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace verix::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // Range of sum_i w[i] * v[i] over v[i] in [lo[i], hi[i]], lo <= hi.
    void (*interval_dot)(const double* w, const double* lo, const double* hi, std::size_t n,
                         double* out_lo, double* out_hi);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();

const KernelTable& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Test hook: pins the dispatch table. Throws if the variant is unavailable.
void force_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

struct Range {
    double lo;
    double hi;
};

inline Range interval_dot(std::span<const double> w, std::span<const double> lo,
                          std::span<const double> hi) {
    Range r{};
    active().interval_dot(w.data(), lo.data(), hi.data(), w.size(), &r.lo, &r.hi);
    return r;
}

}  // namespace verix::simd
