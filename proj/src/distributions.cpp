#include "smreg/distributions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smreg/errors.hpp"

namespace smreg {
namespace {

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

// Rising factorial a (a+1) ... (a+k-1).
double rising(double a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a + i;
    return r;
}

double simpson(const DistributionSpec& d, double beta, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    auto f = [&](double x) { return std::exp(beta * x) * d.pdf(x); };
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
    return s * h / 3.0;
}

}  // namespace

DistributionSpec DistributionSpec::exponential(double rate) {
    require(rate > 0.0 && std::isfinite(rate), "exponential rate must be positive");
    return {DistKind::Exponential, rate, 0.0};
}

DistributionSpec DistributionSpec::gamma(double shape, double rate) {
    require(shape > 0.0 && rate > 0.0, "gamma shape and rate must be positive");
    return {DistKind::Gamma, shape, rate};
}

DistributionSpec DistributionSpec::chi_squared(double dof) {
    require(dof > 0.0, "chi-squared degrees of freedom must be positive");
    return {DistKind::ChiSquared, dof, 0.0};
}

DistributionSpec DistributionSpec::weibull(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "weibull shape and scale must be positive");
    return {DistKind::Weibull, shape, scale};
}

DistributionSpec DistributionSpec::uniform(double low, double high) {
    require(low < high, "uniform law needs low < high");
    return {DistKind::Uniform, low, high};
}

DistributionSpec DistributionSpec::normal(double mean, double sd) {
    require(sd > 0.0, "normal standard deviation must be positive");
    return {DistKind::Normal, mean, sd};
}

DistributionSpec DistributionSpec::rademacher() { return {DistKind::Rademacher, 0.0, 0.0}; }

DistributionSpec DistributionSpec::laplace(double scale) {
    require(scale > 0.0, "laplace scale must be positive");
    return {DistKind::Laplace, scale, 0.0};
}

double DistributionSpec::sample(RandomStream& rng) const {
    auto& e = rng.engine();
    switch (kind) {
        case DistKind::Exponential:
            return std::exponential_distribution<double>(a)(e);
        case DistKind::Gamma:
            return std::gamma_distribution<double>(a, 1.0 / b)(e);
        case DistKind::ChiSquared:
            return std::chi_squared_distribution<double>(a)(e);
        case DistKind::Weibull:
            return std::weibull_distribution<double>(a, b)(e);
        case DistKind::Uniform:
            return a + (b - a) * rng.uniform();
        case DistKind::Normal:
            return a + b * rng.normal();
        case DistKind::Rademacher:
            return (e() >> 63) ? 1.0 : -1.0;
        case DistKind::Laplace: {
            const double mag = std::exponential_distribution<double>(1.0 / a)(e);
            return (e() >> 63) ? mag : -mag;
        }
    }
    return 0.0;
}

double DistributionSpec::pdf(double x) const {
    switch (kind) {
        case DistKind::Exponential:
            return x < 0.0 ? 0.0 : a * std::exp(-a * x);
        case DistKind::Gamma:
            if (x < 0.0) return 0.0;
            if (x == 0.0) return a < 1.0 ? INFINITY : (a == 1.0 ? b : 0.0);
            return std::exp(a * std::log(b) + (a - 1.0) * std::log(x) - b * x - std::lgamma(a));
        case DistKind::ChiSquared: {
            const double k = a / 2.0;
            if (x < 0.0) return 0.0;
            if (x == 0.0) return k < 1.0 ? INFINITY : (k == 1.0 ? 0.5 : 0.0);
            return std::exp((k - 1.0) * std::log(x) - x / 2.0 - k * std::numbers::ln2 - std::lgamma(k));
        }
        case DistKind::Weibull:
            if (x < 0.0) return 0.0;
            if (x == 0.0) return a < 1.0 ? INFINITY : (a == 1.0 ? 1.0 / b : 0.0);
            return (a / b) * std::pow(x / b, a - 1.0) * std::exp(-std::pow(x / b, a));
        case DistKind::Uniform:
            return (x < a || x > b) ? 0.0 : 1.0 / (b - a);
        case DistKind::Normal: {
            const double z = (x - a) / b;
            return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
        }
        case DistKind::Rademacher:
            return 0.0;
        case DistKind::Laplace:
            return std::exp(-std::abs(x) / a) / (2.0 * a);
    }
    return 0.0;
}

double DistributionSpec::raw_moment(int k) const {
    if (k < 1 || k > 4) throw DomainError("raw_moment supports orders 1..4");
    switch (kind) {
        case DistKind::Exponential:
            return std::tgamma(k + 1.0) / std::pow(a, k);
        case DistKind::Gamma:
            return rising(a, k) / std::pow(b, k);
        case DistKind::ChiSquared:
            return rising(a / 2.0, k) * std::pow(2.0, k);
        case DistKind::Weibull:
            return std::pow(b, k) * std::tgamma(1.0 + k / a);
        case DistKind::Uniform:
            return (std::pow(b, k + 1) - std::pow(a, k + 1)) / ((k + 1) * (b - a));
        case DistKind::Normal: {
            const double m = a, s2 = b * b;
            switch (k) {
                case 1: return m;
                case 2: return m * m + s2;
                case 3: return m * m * m + 3.0 * m * s2;
                default: return m * m * m * m + 6.0 * m * m * s2 + 3.0 * s2 * s2;
            }
        }
        case DistKind::Rademacher:
            return k % 2 == 0 ? 1.0 : 0.0;
        case DistKind::Laplace:
            return k % 2 == 0 ? std::tgamma(k + 1.0) * std::pow(a, k) : 0.0;
    }
    return 0.0;
}

double DistributionSpec::variance() const {
    const double m = raw_moment(1);
    return raw_moment(2) - m * m;
}

bool DistributionSpec::strictly_positive() const {
    switch (kind) {
        case DistKind::Exponential:
        case DistKind::Gamma:
        case DistKind::ChiSquared:
        case DistKind::Weibull:
            return true;
        case DistKind::Uniform:
            return a > 0.0;
        default:
            return false;
    }
}

std::optional<double> DistributionSpec::mgf(double beta) const {
    switch (kind) {
        case DistKind::Exponential:
            if (beta >= a) return std::nullopt;
            return a / (a - beta);
        case DistKind::Gamma:
            if (beta >= b) return std::nullopt;
            return std::pow(1.0 - beta / b, -a);
        case DistKind::ChiSquared:
            if (beta >= 0.5) return std::nullopt;
            return std::pow(1.0 - 2.0 * beta, -a / 2.0);
        case DistKind::Weibull:
            if (a < 1.0 && beta > 0.0) return std::nullopt;
            if (a == 1.0) {
                if (beta >= 1.0 / b) return std::nullopt;
                return 1.0 / (1.0 - beta * b);
            }
            return mgf_by_quadrature(*this, beta);
        case DistKind::Uniform:
            if (beta == 0.0) return 1.0;
            return (std::exp(beta * b) - std::exp(beta * a)) / (beta * (b - a));
        case DistKind::Normal:
            return std::exp(beta * a + 0.5 * beta * beta * b * b);
        case DistKind::Rademacher:
            return std::cosh(beta);
        case DistKind::Laplace:
            if (std::abs(beta) >= 1.0 / a) return std::nullopt;
            return 1.0 / (1.0 - a * a * beta * beta);
    }
    return std::nullopt;
}

std::optional<double> mgf_by_quadrature(const DistributionSpec& d, double beta) {
    const double scale = std::sqrt(d.raw_moment(2));
    double hi = 8.0 * scale;
    double total = simpson(d, beta, 0.0, hi, 4000);
    for (int window = 0; window < 40; ++window) {
        const double piece = simpson(d, beta, hi, 2.0 * hi, 4000);
        if (!std::isfinite(piece) || !std::isfinite(total)) return std::nullopt;
        total += piece;
        hi *= 2.0;
        if (piece <= 1e-14 * total) return total;
    }
    return std::nullopt;
}

std::string DistributionSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case DistKind::Exponential: os << "exponential(rate=" << a << ")"; break;
        case DistKind::Gamma: os << "gamma(shape=" << a << ", rate=" << b << ")"; break;
        case DistKind::ChiSquared: os << "chi2(k=" << a << ")"; break;
        case DistKind::Weibull: os << "weibull(shape=" << a << ", scale=" << b << ")"; break;
        case DistKind::Uniform: os << "uniform(" << a << ", " << b << ")"; break;
        case DistKind::Normal: os << "normal(" << a << ", " << b << ")"; break;
        case DistKind::Rademacher: os << "rademacher"; break;
        case DistKind::Laplace: os << "laplace(scale=" << a << ")"; break;
    }
    return os.str();
}

}  // namespace smreg
