#pragma once

// Renewal density rho of an inter-arrival law with density g, obtained from
// the renewal equation rho = g + g * rho on a uniform grid, together with
// the deviation Upsilon = rho - 1/tau_bar and its summary statistics.

#include <span>
#include <vector>

#include "smreg/distributions.hpp"

namespace smreg {

struct RenewalProfile {
    double step = 0.0;            // h_r
    std::vector<double> rho;      // rho(i h_r), i = 0..M
    double tau_bar = 0.0;
    double upsilon_l1 = 0.0;      // int_0^T |rho - 1/tau_bar|
    double rho_sup = 0.0;         // max over the grid
    double truncation_T = 0.0;
    double tail_bound = 0.0;      // |rho(T) - 1/tau_bar|
    double tolerance = 1e-3;
    bool converged = false;
    double density_scale = 1.0;   // factor applied to the sampled density

    double x(std::size_t i) const { return static_cast<double>(i) * step; }
    // Linear interpolation; beyond T the plateau 1/tau_bar is returned.
    double at(double x) const;
    double upsilon(std::size_t i) const { return rho[i] - 1.0 / tau_bar; }
};

struct RenewalOptions {
    double truncation_mult = 20.0;   // T = mult * tau_bar
    double steps_per_mean = 500.0;   // h_r = tau_bar / steps
    double tolerance = 1e-3;
};

// Solves the discretised renewal equation by forward trapezoid substitution.
// `g` holds the density on x_i = i * step, i = 0..M. When tau_bar <= 0 it is
// computed by quadrature of x g(x).
// Throws DomainError on negative or non-finite g, or mass above 1 + tolerance.
RenewalProfile solve_renewal_density(std::span<const double> g, double step, double tau_bar = 0.0,
                                     double tolerance = 1e-3);

// Samples the law's density on the default grid and solves.
RenewalProfile renewal_profile(const DistributionSpec& law, const RenewalOptions& opts = {});

struct UpsilonStats {
    double upsilon_l1 = 0.0;
    double rho_sup = 0.0;
};

// Throws RefusalError for a non-converged profile.
UpsilonStats upsilon_stats(const RenewalProfile& profile);

// max_i |rho_i - g_i - (g * rho)_i| with the convolution evaluated by the
// trapezoid rule; a residual check independent of the forward recursion order.
double renewal_residual(const RenewalProfile& profile, std::span<const double> g);

struct ExponentialMomentCheck {
    double value = 0.0;   // E exp(beta tau), +inf when divergent
    bool finite = false;  // exponential-moment condition holds at this beta
};

// Throws DomainError for beta <= 0.
ExponentialMomentCheck check_exponential_moment(const DistributionSpec& law, double beta);

}  // namespace smreg
