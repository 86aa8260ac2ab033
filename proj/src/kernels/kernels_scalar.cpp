#include "qmarg/kernels.hpp"

namespace qmarg::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sq_dist_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void gemv_t_scalar(const double* q, std::size_t rows, std::size_t cols, const double* x, double* out) {
    for (std::size_t j = 0; j < cols; ++j) out[j] = dot_scalar(q + j * rows, x, rows);
}

void gemv_n_acc_scalar(const double* q, std::size_t rows, std::size_t cols, const double* c, double* y) {
    for (std::size_t j = 0; j < cols; ++j) axpy_scalar(c[j], q + j * rows, y, rows);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Backend::Scalar, dot_scalar, axpy_scalar, sq_dist_scalar,
                                   gemv_t_scalar, gemv_n_acc_scalar};
    return table;
}

}  // namespace qmarg::kernels
