#pragma once

// Data-parallel inner loops shared by the estimator, renewal solver and risk
// harness. Every kernel has a scalar reference implementation; an AVX2/FMA
// variant is selected at runtime when the CPU supports it.
//
// The variants agree to rounding (they reassociate sums) but each variant is
// deterministic, so results are bit-reproducible for a fixed backend.

#include <cstddef>
#include <span>
#include <string_view>

namespace smreg::kernels {

enum class Backend { Scalar, Avx2 };

// The three sums entering the selection cost of a weight vector.
struct CostMoments {
    double weighted_sq = 0.0;   // sum lambda_j^2 * a_j
    double weighted = 0.0;      // sum lambda_j * b_j
    double lambda_sq = 0.0;     // sum lambda_j^2
};

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum_squares)(const double* a, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    CostMoments (*cost_moments)(const double* lambda, const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(SMREG_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool backend_available(Backend b);
Backend detect_backend();

// Backend used by the free functions below. Defaults to detect_backend();
// the SMREG_KERNELS environment variable ("scalar" or "avx2") overrides.
Backend active_backend();
void set_active_backend(Backend b);
const KernelTable& table(Backend b);
std::string_view backend_name(Backend b);

double dot(std::span<const double> a, std::span<const double> b);
double sum_squares(std::span<const double> a);
double squared_distance(std::span<const double> a, std::span<const double> b);
CostMoments cost_moments(std::span<const double> lambda, std::span<const double> a,
                         std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace smreg::kernels
