#include <atomic>
#include <cstdlib>
#include <string>

#include "smreg/errors.hpp"
#include "smreg/kernels.hpp"

namespace smreg::kernels {
namespace {

Backend initial_backend() {
    if (const char* env = std::getenv("SMREG_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Backend::Scalar;
        if (v == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
    }
    return detect_backend();
}

std::atomic<Backend>& active() {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) throw DomainError("kernel operands have mismatched lengths");
}

}  // namespace

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(SMREG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            __builtin_cpu_init();
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Backend detect_backend() {
    return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

Backend active_backend() { return active().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
    if (!backend_available(b)) throw DomainError("kernel backend not available on this CPU");
    active().store(b, std::memory_order_relaxed);
}

const KernelTable& table(Backend b) {
#if defined(SMREG_HAVE_AVX2)
    if (b == Backend::Avx2) return avx2_table();
#endif
    (void)b;
    return scalar_table();
}

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
    check_lengths(a.size(), b.size());
    return table(active_backend()).dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) {
    return table(active_backend()).sum_squares(a.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    check_lengths(a.size(), b.size());
    return table(active_backend()).squared_distance(a.data(), b.data(), a.size());
}

CostMoments cost_moments(std::span<const double> lambda, std::span<const double> a,
                         std::span<const double> b) {
    check_lengths(lambda.size(), a.size());
    check_lengths(lambda.size(), b.size());
    return table(active_backend()).cost_moments(lambda.data(), a.data(), b.data(), lambda.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_lengths(x.size(), y.size());
    table(active_backend()).axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace smreg::kernels
