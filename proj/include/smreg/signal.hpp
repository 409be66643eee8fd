#pragma once

// 1-periodic regression functions on [0, 1), the trigonometric basis, and the
// Sobolev-ellipsoid quantities used to judge estimator efficiency.

#include <span>
#include <vector>

namespace smreg {

// Fractional part {t} for t >= 0.
double frac(double t);

// Tr_1 = 1, Tr_j = sqrt(2) cos(2 pi [j/2] t) for even j and
// sqrt(2) sin(2 pi [j/2] t) for odd j >= 3, evaluated at {t}.
// Throws DomainError for j == 0.
double trig_basis(int j, double t);

// Fills out[j-1] = Tr_j(t) for j = 1..out.size().
void trig_basis_row(double t, std::span<double> out);

// Basis values on the uniform periodic grid r/q, r = 0..q-1. Rows are filled
// from exact cos/sin tables indexed by (k r) mod q.
class PeriodicBasisTable {
public:
    explicit PeriodicBasisTable(int q);
    int nodes() const { return q_; }
    // out[r] = Tr_j(r/q); out.size() must equal q.
    void fill_row(int j, std::span<double> out) const;

private:
    int q_;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

enum class SignalKind { PaperTestSignal, CoefficientList, SampledGrid };

struct SampledValues {
    std::vector<double> grid;    // strictly increasing points in [0, 1)
    std::vector<double> values;
};

class SignalSpec {
public:
    // t sin(2 pi t) + t^2 (1 - t) cos(4 pi t) on [0, 1), extended periodically.
    static SignalSpec paper_test_signal();
    // sum_j theta_j Tr_j(t), j = 1..coefficients.size().
    static SignalSpec from_coefficients(std::vector<double> coefficients);
    // Periodic linear interpolation; needs at least 2 points.
    static SignalSpec from_samples(SampledValues samples);

    SignalKind kind() const { return kind_; }
    const std::vector<double>& coefficients() const { return coefficients_; }
    const SampledValues& samples() const { return samples_; }

    // Throws DomainError for t < 0.
    double operator()(double t) const;

private:
    SignalKind kind_ = SignalKind::PaperTestSignal;
    std::vector<double> coefficients_;
    SampledValues samples_;
};

double eval_signal(const SignalSpec& spec, double t);

inline constexpr int kDefaultQuadrature = 200000;

// (theta_1 .. theta_J) by the periodic trapezoid rule on Q uniform nodes.
// Requires J >= 1 and Q >= 2J + 2.
std::vector<double> fourier_coefficients(const SignalSpec& spec, int J,
                                         int Q = kDefaultQuadrature);

// (1/Q) sum_{r<Q} S(r/Q)^2.
double quadrature_norm_sq(const SignalSpec& spec, int Q = kDefaultQuadrature);

struct SobolevSpec {
    int k = 1;       // smoothness order, >= 1
    double r = 1.0;  // ellipsoid radius, > 0
};

// ((2k+1) r)^{1/(2k+1)} (k / ((k+1) pi))^{2k/(2k+1)}
double pinsker_constant(const SobolevSpec& s);

// a_j = sum_{i=0}^{k} (2 pi [j/2])^{2i} for j = 1..J, with 0^0 = 1 so a_1 = 1.
std::vector<double> sobolev_weights(const SobolevSpec& s, int J);

}  // namespace smreg
