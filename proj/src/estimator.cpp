#include "smreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smreg/errors.hpp"
#include "smreg/kernels.hpp"
#include "smreg/signal.hpp"

namespace smreg {

CoefficientEstimates estimate_coefficients(const ObservationPath& path) {
    const int n = path.n;
    if (n < 2) throw DomainError("estimate_coefficients: need n >= 2");
    if (path.p < 1 || static_cast<std::int64_t>(path.increments.size()) != path.p) {
        throw DomainError("estimate_coefficients: path increments do not match p");
    }
    CoefficientEstimates est;
    est.n = n;
    est.theta_hat.assign(static_cast<std::size_t>(n), 0.0);

    if (path.p % n == 0) {
        // Cell i starts at i h with {i h} = (i mod q) / q: fold one period.
        const auto q = static_cast<int>(path.p / n);
        std::vector<double> folded(static_cast<std::size_t>(q), 0.0);
        for (std::int64_t i = 0; i < path.p; ++i) folded[static_cast<std::size_t>(i % q)] += path.increments[i];
        PeriodicBasisTable table(q);
        std::vector<double> row(static_cast<std::size_t>(q));
        for (int j = 1; j <= n; ++j) {
            table.fill_row(j, row);
            est.theta_hat[j - 1] = kernels::dot(row, folded) / n;
        }
    } else {
        const double h = path.step();
        std::vector<double> row(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < path.p; ++i) {
            trig_basis_row(static_cast<double>(i) * h, row);
            kernels::axpy(path.increments[i], row, est.theta_hat);
        }
        for (auto& v : est.theta_hat) v /= n;
    }
    return est;
}

double variance_proxy(const CoefficientEstimates& est) {
    if (est.n < 2) throw DomainError("variance_proxy: need n >= 2");
    const auto first = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(est.n))));
    return kernels::sum_squares(std::span<const double>(est.theta_hat).subspan(first));
}

double variance_proxy(const ObservationPath& path) {
    if (path.n < 2) throw DomainError("variance_proxy: need n >= 2");
    return variance_proxy(estimate_coefficients(path));
}

double pinsker_d(int beta) {
    const double b = beta;
    return (b + 1.0) * (2.0 * b + 1.0) / (std::pow(std::numbers::pi, 2.0 * b) * b);
}

WeightFamily build_weight_family(int n, double varsigma_star, double eps, int k_star, int m) {
    if (n < 2) throw DomainError("build_weight_family: need n >= 2");
    if (!(varsigma_star > 0.0)) throw DomainError("build_weight_family: varsigma* must be positive");
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("build_weight_family: eps must lie in (0, 1)");
    if (k_star < 1 || m < 1) throw DomainError("build_weight_family: need k* >= 1 and m >= 1");

    WeightFamily f;
    f.n = n;
    f.epsilon = eps;
    f.k_star = k_star;
    f.m = m;
    f.varsigma_star = varsigma_star;
    f.upsilon_n = n / varsigma_star;
    f.j_star = std::max(1, 1 + static_cast<int>(std::floor(std::log(f.upsilon_n))));
    f.card = static_cast<std::size_t>(k_star) * static_cast<std::size_t>(m);
    f.alphas.reserve(f.card);
    f.omegas.reserve(f.card);
    f.supports.reserve(f.card);
    f.weights.assign(f.card * static_cast<std::size_t>(n), 0.0);

    const int plateau = std::min(n, f.j_star - 1);
    double max_sum = 0.0;
    std::size_t row = 0;
    for (int beta = 1; beta <= k_star; ++beta) {
        const double d = pinsker_d(beta);
        for (int i = 1; i <= m; ++i, ++row) {
            const double l = i * eps;
            const double omega = std::pow(d * l * f.upsilon_n, 1.0 / (2.0 * beta + 1.0));
            double* w = f.weights.data() + row * static_cast<std::size_t>(n);
            std::fill(w, w + plateau, 1.0);
            int support = plateau;
            for (int j = std::max(f.j_star, 1); j <= n && j <= omega; ++j) {
                w[j - 1] = 1.0 - std::pow(j / omega, beta);
                support = j;
            }
            double sum = 0.0;
            for (int j = 0; j < support; ++j) sum += w[j];
            max_sum = std::max(max_sum, sum);
            f.alphas.push_back({beta, l});
            f.omegas.push_back(omega);
            f.supports.push_back(support);
        }
    }
    f.lambda_norm_max = 1.0 + max_sum;
    return f;
}

double EstimatorParams::eps_for(int n) const { return eps ? *eps : 1.0 / std::log(n); }

int EstimatorParams::k_star_for(int n) const {
    return k_star0 + static_cast<int>(std::floor(std::sqrt(std::log(n))));
}

int EstimatorParams::m_for(int n) const {
    double v = 0.0;
    if (m_rule == MRule::LnSquared) {
        const double l = std::log(n);
        v = l * l;
    } else {
        const double e = eps_for(n);
        v = 1.0 / (e * e);
    }
    // Guard against 1/eps^2 landing just below an integer.
    return std::max(1, static_cast<int>(std::floor(v * (1.0 + 1e-12))));
}

double EstimatorParams::delta_for(int n) const {
    if (delta) return *delta;
    const double l = std::log(n);
    return delta_rule == DeltaRule::Simulation ? 1.0 / ((3.0 + l) * (3.0 + l)) : 1.0 / (6.0 + l);
}

WeightFamily default_weight_family(int n, const EstimatorParams& params, double sigma_hat) {
    double vs = params.varsigma_star;
    // A zero proxy (noiseless path) would send upsilon_n to infinity.
    if (params.varsigma_plug_in) vs = std::max(sigma_hat, 1.0 / n);
    return build_weight_family(n, vs, params.eps_for(n), params.k_star_for(n), params.m_for(n));
}

namespace {

void check_lambda(const CoefficientEstimates& est, std::span<const double> lambda) {
    if (lambda.size() != est.theta_hat.size()) {
        throw DomainError("weight vector length does not match the number of coefficients");
    }
}

}  // namespace

double penalty(const CoefficientEstimates& est, double sigma_hat, std::span<const double> lambda) {
    check_lambda(est, lambda);
    return sigma_hat * kernels::sum_squares(lambda) / est.n;
}

double cost_function(const CoefficientEstimates& est, double sigma_hat,
                     std::span<const double> lambda, double delta) {
    check_lambda(est, lambda);
    if (!(delta > 0.0)) throw DomainError("cost_function: delta must be positive");
    std::vector<double> a(est.theta_hat.size()), b(est.theta_hat.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        a[j] = est.theta_hat[j] * est.theta_hat[j];
        b[j] = a[j] - sigma_hat / est.n;
    }
    const auto m = kernels::cost_moments(lambda, a, b);
    return m.weighted_sq - 2.0 * m.weighted + delta * sigma_hat * m.lambda_sq / est.n;
}

SelectionReport select_model(const CoefficientEstimates& est, double sigma_hat,
                             const WeightFamily& family, double delta) {
    if (family.size() == 0) throw DomainError("select_model: empty weight family");
    if (family.n != est.n) throw DomainError("select_model: family built for a different n");
    if (!(delta > 0.0)) throw DomainError("select_model: delta must be positive");

    const auto n = static_cast<std::size_t>(est.n);
    std::vector<double> a(n), b(n);
    for (std::size_t j = 0; j < n; ++j) {
        a[j] = est.theta_hat[j] * est.theta_hat[j];
        b[j] = a[j] - sigma_hat / est.n;
    }

    SelectionReport rep;
    rep.n = est.n;
    rep.sigma_hat = sigma_hat;
    rep.delta = delta;
    rep.costs.resize(family.size());
    rep.penalties.resize(family.size());
    const auto& k = kernels::table(kernels::active_backend());
    for (std::size_t alpha = 0; alpha < family.size(); ++alpha) {
        const auto len = static_cast<std::size_t>(family.supports[alpha]);
        const auto m = k.cost_moments(family.weight(alpha).data(), a.data(), b.data(), len);
        const double pen = sigma_hat * m.lambda_sq / est.n;
        rep.penalties[alpha] = pen;
        rep.costs[alpha] = m.weighted_sq - 2.0 * m.weighted + delta * pen;
    }
    std::size_t best = 0;
    for (std::size_t alpha = 1; alpha < family.size(); ++alpha) {
        if (rep.costs[alpha] < rep.costs[best]) best = alpha;
    }
    rep.selected_alpha = best;
    rep.theta_hat = est.theta_hat;
    rep.estimate_coeffs.resize(n);
    const auto w = family.weight(best);
    for (std::size_t j = 0; j < n; ++j) rep.estimate_coeffs[j] = w[j] * est.theta_hat[j];
    return rep;
}

SelectionReport select_model(const ObservationPath& path, const WeightFamily& family, double delta) {
    const auto est = estimate_coefficients(path);
    return select_model(est, variance_proxy(est), family, delta);
}

EstimationResult estimate(const ObservationPath& path, const EstimatorParams& params) {
    const auto est = estimate_coefficients(path);
    const double sigma_hat = params.known_sigma ? *params.known_sigma : variance_proxy(est);
    EstimationResult r;
    r.family = default_weight_family(path.n, params, sigma_hat);
    r.report = select_model(est, sigma_hat, r.family, params.delta_for(path.n));
    return r;
}

std::vector<double> reconstruct(std::span<const double> coeffs, std::span<const double> points) {
    std::vector<double> out(points.size(), 0.0);
    std::vector<double> row(points.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (coeffs[j] == 0.0) continue;
        const int idx = static_cast<int>(j) + 1;
        for (std::size_t i = 0; i < points.size(); ++i) row[i] = trig_basis(idx, points[i]);
        kernels::axpy(coeffs[j], row, out);
    }
    return out;
}

std::vector<double> reconstruct(const SelectionReport& report, std::span<const double> points) {
    return reconstruct(report.estimate_coeffs, points);
}

bool delta_in_theory_range(double delta) { return delta > 0.0 && delta <= 1.0 / 6.0; }

}  // namespace smreg
