#include "smreg/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smreg/errors.hpp"
#include "smreg/kernels.hpp"

namespace smreg {

double RenewalProfile::at(double xv) const {
    if (rho.empty()) return 0.0;
    if (xv <= 0.0) return rho.front();
    const double pos = xv / step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= rho.size()) return 1.0 / tau_bar;
    const double w = pos - static_cast<double>(i);
    return rho[i] + w * (rho[i + 1] - rho[i]);
}

RenewalProfile solve_renewal_density(std::span<const double> g, double step, double tau_bar,
                                     double tolerance) {
    if (g.size() < 2) throw DomainError("renewal solver needs at least two grid values");
    if (!(step > 0.0)) throw DomainError("renewal solver needs a positive step");
    double mass = 0.0, first_moment = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!std::isfinite(g[i]) || g[i] < 0.0) {
            throw DomainError("renewal solver: density must be finite and non-negative");
        }
        const double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
        mass += w * g[i];
        first_moment += w * g[i] * static_cast<double>(i) * step;
    }
    mass *= step;
    first_moment *= step;
    if (mass > 1.0 + tolerance) {
        std::ostringstream os;
        os << "renewal solver: density integrates to " << mass << " > 1";
        throw DomainError(os.str());
    }
    if (!(tau_bar > 0.0)) tau_bar = first_moment;

    const std::size_t M = g.size() - 1;
    RenewalProfile prof;
    prof.step = step;
    prof.tau_bar = tau_bar;
    prof.truncation_T = static_cast<double>(M) * step;
    prof.tolerance = tolerance;
    prof.rho.assign(M + 1, 0.0);

    // g reversed, so that sum_{i=1}^{m-1} g[m-i] rho[i] is a contiguous dot.
    std::vector<double> grev(M + 1);
    for (std::size_t i = 0; i <= M; ++i) grev[i] = g[M - i];

    auto& rho = prof.rho;
    rho[0] = g[0];
    const double denom = 1.0 - 0.5 * step * g[0];
    for (std::size_t m = 1; m <= M; ++m) {
        double conv = 0.5 * g[m] * rho[0];
        if (m > 1) {
            conv += kernels::dot(std::span<const double>(grev).subspan(M - m + 1, m - 1),
                                 std::span<const double>(rho).subspan(1, m - 1));
        }
        rho[m] = (g[m] + step * conv) / denom;
    }

    const double plateau = 1.0 / tau_bar;
    double l1 = 0.0;
    for (std::size_t i = 0; i <= M; ++i) {
        const double w = (i == 0 || i == M) ? 0.5 : 1.0;
        l1 += w * std::abs(rho[i] - plateau);
    }
    prof.upsilon_l1 = l1 * step;
    prof.rho_sup = *std::max_element(rho.begin(), rho.end());
    prof.tail_bound = std::abs(rho[M] - plateau);
    prof.converged = prof.tail_bound < tolerance;
    return prof;
}

RenewalProfile renewal_profile(const DistributionSpec& law, const RenewalOptions& opts) {
    if (!law.strictly_positive()) {
        throw DomainError("renewal profile needs a strictly positive inter-arrival law");
    }
    const double tau = law.mean();
    const double step = tau / opts.steps_per_mean;
    const auto M = static_cast<std::size_t>(std::llround(opts.truncation_mult * opts.steps_per_mean));
    std::vector<double> g(M + 1);
    for (std::size_t i = 0; i <= M; ++i) g[i] = law.pdf(static_cast<double>(i) * step);
    // The law is a probability density whose mass beyond T is negligible, so
    // the sampled g is rescaled to unit trapezoid mass. Otherwise the quadrature
    // error at a singular or steep origin (chi2_3 behaves like sqrt(x)) makes the
    // discrete renewal measure defective and rho drifts linearly away from the
    // plateau.
    double mass = 0.5 * (g.front() + g.back());
    for (std::size_t i = 1; i < M; ++i) mass += g[i];
    mass *= step;
    const double scale = (mass > 0.0 && std::abs(mass - 1.0) < 1e-2) ? 1.0 / mass : 1.0;
    for (auto& v : g) v *= scale;
    auto profile = solve_renewal_density(g, step, tau, opts.tolerance);
    profile.density_scale = scale;
    return profile;
}

UpsilonStats upsilon_stats(const RenewalProfile& profile) {
    if (!profile.converged) {
        std::ostringstream os;
        os << "renewal profile did not converge: |rho(T) - 1/tau_bar| = " << profile.tail_bound
           << " at T = " << profile.truncation_T << " (tolerance " << profile.tolerance << ")";
        throw RefusalError(os.str());
    }
    return {profile.upsilon_l1, profile.rho_sup};
}

double renewal_residual(const RenewalProfile& profile, std::span<const double> g) {
    const auto& rho = profile.rho;
    if (g.size() != rho.size()) throw DomainError("renewal_residual: grid mismatch");
    const double h = profile.step;
    double worst = 0.0;
    for (std::size_t m = 0; m < rho.size(); ++m) {
        double conv = 0.0;
        for (std::size_t i = 0; i <= m; ++i) {
            const double w = (i == 0 || i == m) ? 0.5 : 1.0;
            conv += w * rho[i] * g[m - i];
        }
        if (m == 0) conv = 0.0;
        worst = std::max(worst, std::abs(rho[m] - g[m] - h * conv));
    }
    return worst;
}

ExponentialMomentCheck check_exponential_moment(const DistributionSpec& law, double beta) {
    if (!(beta > 0.0)) throw DomainError("check_exponential_moment: beta must be positive");
    if (auto v = law.mgf(beta)) return {*v, std::isfinite(*v)};
    return {std::numeric_limits<double>::infinity(), false};
}

}  // namespace smreg
