#include "smreg/kernels.hpp"

namespace smreg::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_squares_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

CostMoments cost_moments_scalar(const double* lambda, const double* a, const double* b,
                                std::size_t n) {
    CostMoments m;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = lambda[i];
        const double l2 = l * l;
        m.weighted_sq += l2 * a[i];
        m.weighted += l * b[i];
        m.lambda_sq += l2;
    }
    return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{dot_scalar, sum_squares_scalar, squared_distance_scalar,
                               cost_moments_scalar, axpy_scalar};
    return t;
}

}  // namespace smreg::kernels
