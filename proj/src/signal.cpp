#include "smreg/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smreg/errors.hpp"
#include "smreg/kernels.hpp"

namespace smreg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrt2 = std::numbers::sqrt2;

}  // namespace

double frac(double t) { return t - std::floor(t); }

double trig_basis(int j, double t) {
    if (j < 1) throw DomainError("trig_basis: index must be >= 1");
    if (j == 1) return 1.0;
    const double x = frac(t);
    const double arg = kTwoPi * (j / 2) * x;
    return j % 2 == 0 ? kSqrt2 * std::cos(arg) : kSqrt2 * std::sin(arg);
}

void trig_basis_row(double t, std::span<double> out) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = trig_basis(static_cast<int>(j) + 1, t);
}

PeriodicBasisTable::PeriodicBasisTable(int q) : q_(q), cos_(q), sin_(q) {
    if (q < 1) throw DomainError("basis table needs at least one node");
    for (int m = 0; m < q; ++m) {
        const double arg = kTwoPi * m / q;
        cos_[m] = kSqrt2 * std::cos(arg);
        sin_[m] = kSqrt2 * std::sin(arg);
    }
}

void PeriodicBasisTable::fill_row(int j, std::span<double> out) const {
    if (j < 1) throw DomainError("basis index must be >= 1");
    if (static_cast<int>(out.size()) != q_) throw DomainError("basis row has wrong length");
    if (j == 1) {
        std::fill(out.begin(), out.end(), 1.0);
        return;
    }
    const auto k = static_cast<long long>(j / 2) % q_;
    const auto& src = (j % 2 == 0) ? cos_ : sin_;
    long long idx = 0;
    for (int r = 0; r < q_; ++r) {
        out[r] = src[idx];
        idx += k;
        if (idx >= q_) idx -= q_;
    }
}

SignalSpec SignalSpec::paper_test_signal() { return SignalSpec{}; }

SignalSpec SignalSpec::from_coefficients(std::vector<double> coefficients) {
    SignalSpec s;
    s.kind_ = SignalKind::CoefficientList;
    s.coefficients_ = std::move(coefficients);
    return s;
}

SignalSpec SignalSpec::from_samples(SampledValues samples) {
    if (samples.grid.size() < 2 || samples.grid.size() != samples.values.size()) {
        throw ConfigError("sampled signal needs at least 2 (grid, value) pairs of equal length");
    }
    for (std::size_t i = 0; i < samples.grid.size(); ++i) {
        const double g = samples.grid[i];
        if (!(g >= 0.0 && g < 1.0)) throw ConfigError("sampled signal grid must lie in [0, 1)");
        if (i > 0 && !(g > samples.grid[i - 1])) {
            throw ConfigError("sampled signal grid must be strictly increasing");
        }
    }
    SignalSpec s;
    s.kind_ = SignalKind::SampledGrid;
    s.samples_ = std::move(samples);
    return s;
}

double SignalSpec::operator()(double t) const {
    if (!(t >= 0.0)) throw DomainError("signal evaluated at negative time");
    const double x = frac(t);
    switch (kind_) {
        case SignalKind::PaperTestSignal:
            return x * std::sin(kTwoPi * x) + x * x * (1.0 - x) * std::cos(2.0 * kTwoPi * x);
        case SignalKind::CoefficientList: {
            double s = 0.0;
            for (std::size_t j = 0; j < coefficients_.size(); ++j) {
                s += coefficients_[j] * trig_basis(static_cast<int>(j) + 1, x);
            }
            return s;
        }
        case SignalKind::SampledGrid: {
            const auto& g = samples_.grid;
            const auto& v = samples_.values;
            const std::size_t m = g.size();
            // Segment [g[i], g[i+1]), the last one wrapping to g[0] + 1.
            auto it = std::upper_bound(g.begin(), g.end(), x);
            double x0, x1, y0, y1;
            if (it == g.begin()) {
                x0 = g[m - 1] - 1.0, y0 = v[m - 1];
                x1 = g[0], y1 = v[0];
            } else if (it == g.end()) {
                x0 = g[m - 1], y0 = v[m - 1];
                x1 = g[0] + 1.0, y1 = v[0];
            } else {
                const auto i = static_cast<std::size_t>(it - g.begin());
                x0 = g[i - 1], y0 = v[i - 1];
                x1 = g[i], y1 = v[i];
            }
            const double w = (x - x0) / (x1 - x0);
            return y0 + w * (y1 - y0);
        }
    }
    return 0.0;
}

double eval_signal(const SignalSpec& spec, double t) { return spec(t); }

std::vector<double> fourier_coefficients(const SignalSpec& spec, int J, int Q) {
    if (J < 1) throw DomainError("fourier_coefficients: J must be >= 1");
    if (Q < 2 * J + 2) throw DomainError("fourier_coefficients: Q must be >= 2J + 2");
    std::vector<double> values(Q);
    for (int r = 0; r < Q; ++r) values[r] = spec(static_cast<double>(r) / Q);

    PeriodicBasisTable table(Q);
    std::vector<double> row(Q);
    std::vector<double> theta(J);
    for (int j = 1; j <= J; ++j) {
        table.fill_row(j, row);
        theta[j - 1] = kernels::dot(row, values) / Q;
    }
    return theta;
}

double quadrature_norm_sq(const SignalSpec& spec, int Q) {
    if (Q < 1) throw DomainError("quadrature_norm_sq: Q must be positive");
    std::vector<double> values(Q);
    for (int r = 0; r < Q; ++r) values[r] = spec(static_cast<double>(r) / Q);
    return kernels::sum_squares(values) / Q;
}

double pinsker_constant(const SobolevSpec& s) {
    if (s.k < 1 || !(s.r > 0.0)) throw DomainError("pinsker_constant: need k >= 1 and r > 0");
    const double k = s.k;
    const double e = 2.0 * k + 1.0;
    return std::pow(e * s.r, 1.0 / e) * std::pow(k / ((k + 1.0) * std::numbers::pi), 2.0 * k / e);
}

std::vector<double> sobolev_weights(const SobolevSpec& s, int J) {
    if (s.k < 1 || !(s.r > 0.0)) throw DomainError("sobolev_weights: need k >= 1 and r > 0");
    if (J < 1) throw DomainError("sobolev_weights: J must be >= 1");
    std::vector<double> a(J);
    for (int j = 1; j <= J; ++j) {
        const double w2 = std::pow(kTwoPi * (j / 2), 2.0);
        double term = 1.0;  // i = 0 summand, 0^0 := 1
        double sum = 0.0;
        for (int i = 0; i <= s.k; ++i) {
            sum += term;
            term *= w2;
        }
        a[j - 1] = sum;
    }
    return a;
}

}  // namespace smreg
