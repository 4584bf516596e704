#include "verix/simd.hpp"

#include <algorithm>

namespace verix::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void interval_dot_scalar(const double* w, const double* lo, const double* hi, std::size_t n,
                         double* out_lo, double* out_hi) {
    double acc_lo = 0.0;
    double acc_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = w[i] * lo[i];
        const double b = w[i] * hi[i];
        acc_lo += std::min(a, b);
        acc_hi += std::max(a, b);
    }
    *out_lo = acc_lo;
    *out_hi = acc_hi;
}

constexpr KernelTable kScalar{Isa::Scalar, dot_scalar, axpy_scalar, interval_dot_scalar};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace verix::simd
