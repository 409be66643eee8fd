#pragma once

#include <optional>
#include <string>

#include "smreg/random.hpp"

namespace smreg {

enum class DistKind {
    Exponential,  // a = rate
    Gamma,        // a = shape, b = rate (Erlang when shape is an integer)
    ChiSquared,   // a = degrees of freedom
    Weibull,      // a = shape, b = scale
    Uniform,      // a = low, b = high
    Normal,       // a = mean, b = standard deviation
    Rademacher,   // +-1 with probability 1/2
    Laplace,      // centred, a = scale
};

// A univariate law used for inter-arrival times, marks and jump sizes.
struct DistributionSpec {
    DistKind kind = DistKind::Normal;
    double a = 0.0;
    double b = 1.0;

    static DistributionSpec exponential(double rate);
    static DistributionSpec gamma(double shape, double rate);
    static DistributionSpec erlang(int stages, double rate) { return gamma(stages, rate); }
    static DistributionSpec chi_squared(double dof);
    static DistributionSpec weibull(double shape, double scale);
    static DistributionSpec uniform(double low, double high);
    static DistributionSpec normal(double mean, double sd);
    static DistributionSpec rademacher();
    static DistributionSpec laplace(double scale);

    double sample(RandomStream& rng) const;
    double pdf(double x) const;
    // E X^k for k = 1..4.
    double raw_moment(int k) const;
    double mean() const { return raw_moment(1); }
    double variance() const;
    // True when the law puts all its mass on (0, inf).
    bool strictly_positive() const;
    // E exp(beta X); nullopt when the integral diverges.
    std::optional<double> mgf(double beta) const;
    std::string describe() const;

    bool operator==(const DistributionSpec&) const = default;
};

// E exp(beta X) for a density supported on [0, inf) by composite Simpson
// quadrature over doubling windows. nullopt when it does not settle.
std::optional<double> mgf_by_quadrature(const DistributionSpec& d, double beta);

}  // namespace smreg
