#include "verix/simd.hpp"

#include <immintrin.h>

#include <algorithm>

namespace verix::simd {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void interval_dot_avx2(const double* w, const double* lo, const double* hi, std::size_t n,
                       double* out_lo, double* out_hi) {
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vw = _mm256_loadu_pd(w + i);
        const __m256d a = _mm256_mul_pd(vw, _mm256_loadu_pd(lo + i));
        const __m256d b = _mm256_mul_pd(vw, _mm256_loadu_pd(hi + i));
        acc_lo = _mm256_add_pd(acc_lo, _mm256_min_pd(a, b));
        acc_hi = _mm256_add_pd(acc_hi, _mm256_max_pd(a, b));
    }
    double s_lo = hsum(acc_lo);
    double s_hi = hsum(acc_hi);
    for (; i < n; ++i) {
        const double a = w[i] * lo[i];
        const double b = w[i] * hi[i];
        s_lo += std::min(a, b);
        s_hi += std::max(a, b);
    }
    *out_lo = s_lo;
    *out_hi = s_hi;
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{Isa::Avx2, dot_avx2, axpy_avx2, interval_dot_avx2};

}  // namespace verix::simd
