// AVX2+FMA variants. Compiled without global -mavx2 so that no inline code
// from shared headers is emitted with AVX encodings; each function carries
// its own target attribute and is only reached after a CPUID check.

#include "qmarg/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define QMARG_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#endif

namespace qmarg::kernels {

#ifdef QMARG_HAVE_AVX2_KERNELS

namespace {

#define QMARG_AVX2 __attribute__((target("avx2,fma")))

QMARG_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

QMARG_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
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

QMARG_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

QMARG_AVX2 double sq_dist_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

QMARG_AVX2 void gemv_t_avx2(const double* q, std::size_t rows, std::size_t cols, const double* x, double* out) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = dot_avx2(q + j * rows, x, rows);
}

// Four columns per pass so y is loaded and stored once per block.
QMARG_AVX2 void gemv_n_acc_avx2(const double* q, std::size_t rows, std::size_t cols, const double* c, double* y) {
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
        const double* q0 = q + j * rows;
        const double* q1 = q0 + rows;
        const double* q2 = q1 + rows;
        const double* q3 = q2 + rows;
        const __m256d c0 = _mm256_set1_pd(c[j]);
        const __m256d c1 = _mm256_set1_pd(c[j + 1]);
        const __m256d c2 = _mm256_set1_pd(c[j + 2]);
        const __m256d c3 = _mm256_set1_pd(c[j + 3]);
        std::size_t i = 0;
        for (; i + 4 <= rows; i += 4) {
            __m256d acc = _mm256_loadu_pd(y + i);
            acc = _mm256_fmadd_pd(c0, _mm256_loadu_pd(q0 + i), acc);
            acc = _mm256_fmadd_pd(c1, _mm256_loadu_pd(q1 + i), acc);
            acc = _mm256_fmadd_pd(c2, _mm256_loadu_pd(q2 + i), acc);
            acc = _mm256_fmadd_pd(c3, _mm256_loadu_pd(q3 + i), acc);
            _mm256_storeu_pd(y + i, acc);
        }
        for (; i < rows; ++i) y[i] += c[j] * q0[i] + c[j + 1] * q1[i] + c[j + 2] * q2[i] + c[j + 3] * q3[i];
    }
    for (; j < cols; ++j) axpy_avx2(c[j], q + j * rows, y, rows);
}

bool cpu_has_avx2() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{Backend::Avx2, dot_avx2, axpy_avx2, sq_dist_avx2, gemv_t_avx2, gemv_n_acc_avx2};
    static const bool ok = cpu_has_avx2();
    return ok ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace qmarg::kernels
