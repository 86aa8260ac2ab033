// kernels.hpp
// Real-vector inner loops used by the projection solver. Every kernel has a
// scalar reference version and, on x86-64, an AVX2+FMA version; the active
// table is picked once from CPUID and can be overridden with the
// QMARG_SIMD environment variable ("scalar" or "avx2") or set_backend().
//
// Matrices are column-major with leading dimension == rows.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace qmarg::kernels {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
    Backend backend;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // sum_i (a_i - b_i)^2
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // out[j] = sum_i q[i + j*rows] * x[i]
    void (*gemv_t)(const double* q, std::size_t rows, std::size_t cols, const double* x, double* out);
    // y += sum_j q[:, j] * c[j]
    void (*gemv_n_acc)(const double* q, std::size_t rows, std::size_t cols, const double* c, double* y);
};

const KernelTable& scalar_table();
// nullptr when the CPU or the build lacks AVX2+FMA.
const KernelTable* avx2_table();

const KernelTable& active();
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

// Convenience wrappers over the active table.
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sq_dist(std::span<const double> a, std::span<const double> b) {
    return active().sq_dist(a.data(), b.data(), a.size());
}

}  // namespace qmarg::kernels
