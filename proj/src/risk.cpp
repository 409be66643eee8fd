#include "smreg/risk.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "smreg/errors.hpp"
#include "smreg/kernels.hpp"

namespace smreg {
namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first exception
// is rethrown after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, count));
    if (jobs == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    if (v.empty()) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return r;
}

RandomStream replication_stream(std::uint64_t seed, int n, int r) {
    return RandomStream::derive(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

[[noreturn]] void rethrow_replication(const std::exception& e, int n, int r, std::uint64_t seed) {
    std::ostringstream os;
    os << "replication " << r << " (n = " << n << ", base seed " << seed
       << ", stream seed " << replication_stream(seed, n, r).seed() << ") failed: " << e.what();
    throw ModelError(os.str());
}

}  // namespace

void ExperimentConfig::validate() const {
    noise.validate();
    if (horizons.empty()) throw ConfigError("horizons must not be empty");
    for (int n : horizons) {
        if (n < 2) throw ConfigError("every horizon must be >= 2");
    }
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (eval_points < 100) throw ConfigError("eval_points must be >= 100");
    if (cells_per_unit != 0 && cells_per_unit < 10) throw ConfigError("cells_per_unit must be >= 10");
    if (estimator.eps && !(*estimator.eps > 0.0 && *estimator.eps < 1.0)) {
        throw ConfigError("estimator.eps must lie in (0, 1)");
    }
    if (estimator.delta && !(*estimator.delta > 0.0)) throw ConfigError("estimator.delta must be positive");
    if (!(estimator.varsigma_star > 0.0)) throw ConfigError("estimator.varsigma_star must be positive");
    if (estimator.k_star0 < 0) throw ConfigError("estimator.k_star0 must be >= 0");
}

std::int64_t ExperimentConfig::cells_for(int n) const {
    const int q = cells_per_unit > 0 ? cells_per_unit : auto_cells_per_unit(n);
    return static_cast<std::int64_t>(q) * n;
}

double empirical_risk(std::span<const double> estimate, const SignalSpec& signal, int eval_points) {
    if (eval_points < 100) throw DomainError("empirical_risk: need at least 100 evaluation points");
    if (static_cast<int>(estimate.size()) != eval_points) {
        throw DomainError("empirical_risk: estimate has the wrong number of grid values");
    }
    double s = 0.0;
    for (int j = 1; j <= eval_points; ++j) {
        const double d = estimate[j - 1] - signal(static_cast<double>(j) / eval_points);
        s += d * d;
    }
    return s / eval_points;
}

double signal_norm_sq(const SignalSpec& signal, int eval_points) {
    if (eval_points < 1) throw DomainError("signal_norm_sq: need a positive number of points");
    double s = 0.0;
    for (int j = 0; j <= eval_points; ++j) {
        const double v = signal(static_cast<double>(j) / eval_points);
        s += v * v;
    }
    return s / eval_points;
}

RiskEvaluator::RiskEvaluator(const SignalSpec& signal, int eval_points, int max_coeffs)
    : p_(eval_points) {
    if (eval_points < 100) throw DomainError("RiskEvaluator: need at least 100 evaluation points");
    if (max_coeffs >= eval_points) {
        throw DomainError("RiskEvaluator: coefficient route needs fewer coefficients than grid points");
    }
    values_.resize(static_cast<std::size_t>(p_));
    for (int j = 1; j <= p_; ++j) values_[j - 1] = signal(static_cast<double>(j) / p_);
    norm_grid_ = kernels::sum_squares(values_) / p_;

    // Node r/p for r = 0..p-1; node 0 coincides with j = p.
    std::vector<double> nodes(static_cast<std::size_t>(p_));
    nodes[0] = values_[p_ - 1];
    for (int r = 1; r < p_; ++r) nodes[r] = values_[r - 1];
    PeriodicBasisTable table(p_);
    std::vector<double> row(static_cast<std::size_t>(p_));
    discrete_.resize(static_cast<std::size_t>(max_coeffs));
    for (int j = 1; j <= max_coeffs; ++j) {
        table.fill_row(j, row);
        discrete_[j - 1] = kernels::dot(row, nodes) / p_;
    }
}

double RiskEvaluator::risk_from_coefficients(std::span<const double> coeffs) const {
    if (coeffs.size() > discrete_.size()) throw DomainError("RiskEvaluator: too many coefficients");
    const auto s = std::span<const double>(discrete_).first(coeffs.size());
    return kernels::sum_squares(coeffs) - 2.0 * kernels::dot(coeffs, s) + norm_grid_;
}

double RiskEvaluator::risk_from_grid(std::span<const double> values) const {
    return kernels::squared_distance(values, values_) / p_;
}

std::vector<double> RiskEvaluator::grid() const {
    std::vector<double> t(static_cast<std::size_t>(p_));
    for (int j = 1; j <= p_; ++j) t[j - 1] = static_cast<double>(j) / p_;
    return t;
}

RiskTable run_monte_carlo(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    RiskTable table;
    table.signal_norm = signal_norm_sq(config.signal, config.eval_points);
    for (int n : config.horizons) {
        const auto t0 = std::chrono::steady_clock::now();
        const RiskEvaluator evaluator(config.signal, config.eval_points, n);
        const auto p = config.cells_for(n);
        const bool shared_family = !config.estimator.varsigma_plug_in;
        WeightFamily family;
        if (shared_family) family = default_weight_family(n, config.estimator, 0.0);
        const double delta = config.estimator.delta_for(n);

        std::vector<double> risks(static_cast<std::size_t>(config.replications));
        std::atomic<int> done{0};
        parallel_for(config.replications, options.jobs, [&](int r) {
            try {
                auto rng = replication_stream(config.seed, n, r);
                const auto path = simulate_observations(config.signal, config.noise, n, p, rng);
                const auto est = estimate_coefficients(path);
                const double sigma_hat = config.estimator.known_sigma ? *config.estimator.known_sigma
                                                                      : variance_proxy(est);
                SelectionReport rep;
                if (shared_family) {
                    rep = select_model(est, sigma_hat, family, delta);
                } else {
                    rep = select_model(est, sigma_hat,
                                       default_weight_family(n, config.estimator, sigma_hat), delta);
                }
                risks[static_cast<std::size_t>(r)] = evaluator.risk_from_coefficients(rep.estimate_coeffs);
            } catch (const std::exception& e) {
                rethrow_replication(e, n, r, config.seed);
            }
            if (options.progress) options.progress(n, ++done, config.replications);
        });

        const auto ms = mean_se(risks);
        RiskRow row;
        row.n = n;
        row.mean_risk = ms.mean;
        row.relative_risk = ms.mean / table.signal_norm;
        row.std_error = ms.se;
        row.replications = config.replications;
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        table.rows.push_back(row);
    }
    return table;
}

FamilyComparison compare_with_family(const ExperimentConfig& config, int n, const RunOptions& options) {
    config.validate();
    if (config.estimator.varsigma_plug_in) {
        throw DomainError("compare_with_family needs a fixed varsigma* (shared weight family)");
    }
    const RiskEvaluator evaluator(config.signal, config.eval_points, n);
    const auto p = config.cells_for(n);
    const auto family = default_weight_family(n, config.estimator, 0.0);
    const double delta = config.estimator.delta_for(n);
    const auto reps = static_cast<std::size_t>(config.replications);
    const std::size_t A = family.size();

    std::vector<double> selected(reps);
    std::vector<double> per_alpha(reps * A);
    parallel_for(config.replications, options.jobs, [&](int r) {
        try {
            auto rng = replication_stream(config.seed, n, r);
            const auto path = simulate_observations(config.signal, config.noise, n, p, rng);
            const auto est = estimate_coefficients(path);
            const double sigma_hat = config.estimator.known_sigma ? *config.estimator.known_sigma
                                                                  : variance_proxy(est);
            const auto rep = select_model(est, sigma_hat, family, delta);
            selected[static_cast<std::size_t>(r)] = evaluator.risk_from_coefficients(rep.estimate_coeffs);
            std::vector<double> c(static_cast<std::size_t>(n));
            for (std::size_t a = 0; a < A; ++a) {
                const auto w = family.weight(a);
                for (std::size_t j = 0; j < c.size(); ++j) c[j] = w[j] * est.theta_hat[j];
                per_alpha[static_cast<std::size_t>(r) * A + a] = evaluator.risk_from_coefficients(c);
            }
        } catch (const std::exception& e) {
            rethrow_replication(e, n, r, config.seed);
        }
    });

    FamilyComparison out;
    out.n = n;
    out.replications = config.replications;
    out.delta = delta;
    const auto ms = mean_se(selected);
    out.selected_mean = ms.mean;
    out.selected_se = ms.se;
    out.per_alpha_mean.assign(A, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t a = 0; a < A; ++a) out.per_alpha_mean[a] += per_alpha[r * A + a];
    }
    for (auto& v : out.per_alpha_mean) v /= static_cast<double>(reps);
    out.best_alpha = 0;
    for (std::size_t a = 1; a < A; ++a) {
        if (out.per_alpha_mean[a] < out.per_alpha_mean[out.best_alpha]) out.best_alpha = a;
    }
    out.best_mean = out.per_alpha_mean[out.best_alpha];
    return out;
}

OracleConstants oracle_constants(const NoiseModel& noise, const RenewalProfile& profile, int n,
                                 const WeightFamily& family) {
    if (n < 1) throw DomainError("oracle_constants: n must be positive");
    const auto stats = upsilon_stats(profile);
    OracleConstants c;
    c.phi_max = std::numbers::sqrt2;
    const double phi2 = c.phi_max * c.phi_max;
    const double phi4 = phi2 * phi2;
    c.tau_bar = profile.tau_bar;
    c.upsilon_l1 = stats.upsilon_l1;
    c.rho_sup = stats.rho_sup;
    c.sigma_q = noise.rho1 * noise.rho1 + noise.rho2 * noise.rho2 / c.tau_bar;
    c.kappa_q = noise.rho1 * noise.rho1 + noise.rho2 * noise.rho2 * c.rho_sup;
    c.mark_m4 = noise.mark_fourth_moment();
    c.jump_m4 = noise.jump_fourth_moment();
    c.iota = static_cast<double>(family.card);
    c.lambda_norm_max = family.lambda_norm_max;

    const double tau = c.tau_bar;
    c.l_check = (4.0 * tau * tau + 8.0) * c.upsilon_l1 + 5.0 +
                13.0 * (1.0 + tau) * (1.0 + tau) * (1.0 + c.rho_sup * c.rho_sup) * c.mark_m4 +
                4.0 * c.jump_m4;
    const double s = c.sigma_q;
    c.c1 = s * tau * phi2 * c.upsilon_l1;
    c.c2 = phi4 * std::pow(1.0 + s * s, 3) * c.l_check;
    c.psi_q = 4.0 * c.kappa_q * c.iota + (5.0 + 4.0 * c.iota / s) * (c.c1 + c.c2);
    c.c_star_q = s + 2.0 * c.kappa_q + c.c1 + phi4 * std::pow(1.0 + s * s, 2) * c.l_check;
    return c;
}

NoiseFunctionalReport noise_functional_diagnostics(const ExperimentConfig& config, int replications,
                                                   int n, const RunOptions& options) {
    config.validate();
    if (replications < 1000) throw DomainError("noise functional diagnostics need >= 1000 replications");
    if (n == 0) n = config.horizons.front();
    if (n < 2) throw DomainError("noise functional diagnostics need n >= 2");
    const auto p = config.cells_for(n);
    const auto N = static_cast<std::size_t>(n);
    const double sigma_q = config.noise.sigma_q();

    // Noiseless path on the same grid gives the discretised true coefficients.
    NoiseModel silent = config.noise;
    silent.rho1 = 0.0;
    silent.rho2 = 0.0;
    RandomStream unused(0);
    const auto theta = estimate_coefficients(simulate_observations(config.signal, silent, n, p, unused)).theta_hat;

    // Probe vectors, drawn from a dedicated substream.
    auto probe_rng = RandomStream::derive(config.seed, {0x70726f6265ULL, static_cast<std::uint64_t>(n)});
    auto rademacher = [&](double scale) {
        std::vector<double> x(N);
        for (auto& v : x) v = ((probe_rng.engine()() >> 63) ? 1.0 : -1.0) * scale;
        return x;
    };
    std::vector<std::pair<std::string, std::vector<double>>> b1_probes;
    b1_probes.emplace_back("ones", std::vector<double>(N, 1.0));
    for (int i = 0; i < 5; ++i) b1_probes.emplace_back("rademacher_" + std::to_string(i), rademacher(1.0));

    const double unit = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::pair<std::string, std::vector<double>>> b2_probes;
    b2_probes.emplace_back("ones_unit", std::vector<double>(N, unit));
    for (int i = 0; i < 20; ++i) b2_probes.emplace_back("rademacher_unit_" + std::to_string(i), rademacher(unit));
    {
        const auto fam = default_weight_family(n, config.estimator, sigma_q);
        const std::size_t picks = std::min<std::size_t>(5, fam.size());
        for (std::size_t i = 0; i < picks; ++i) {
            const std::size_t a = (picks == 1) ? 0 : i * (fam.size() - 1) / (picks - 1);
            auto w = fam.weight(a);
            const double norm = std::sqrt(kernels::sum_squares(w));
            std::vector<double> x(w.begin(), w.end());
            for (auto& v : x) v /= norm;
            b2_probes.emplace_back("weight_" + std::to_string(a), std::move(x));
        }
    }

    const auto M = static_cast<std::size_t>(replications);
    std::vector<double> b1_vals(M * b1_probes.size());
    std::vector<double> b2_vals(M * b2_probes.size());
    parallel_for(replications, options.jobs, [&](int r) {
        try {
            auto rng = replication_stream(config.seed, n, r);
            const auto path = simulate_observations(config.signal, config.noise, n, p, rng);
            const auto est = estimate_coefficients(path);
            std::vector<double> xi2(N);
            for (std::size_t j = 0; j < N; ++j) {
                const double xi = std::sqrt(static_cast<double>(n)) * (est.theta_hat[j] - theta[j]);
                xi2[j] = xi * xi;
            }
            std::vector<double> centred(N);
            for (std::size_t j = 0; j < N; ++j) centred[j] = xi2[j] - sigma_q;
            const auto rr = static_cast<std::size_t>(r);
            for (std::size_t k = 0; k < b1_probes.size(); ++k) {
                b1_vals[rr * b1_probes.size() + k] = kernels::dot(b1_probes[k].second, centred);
            }
            for (std::size_t k = 0; k < b2_probes.size(); ++k) {
                b2_vals[rr * b2_probes.size() + k] = kernels::dot(b2_probes[k].second, xi2);
            }
        } catch (const std::exception& e) {
            rethrow_replication(e, n, r, config.seed);
        }
    });

    NoiseFunctionalReport rep;
    rep.n = n;
    rep.replications = replications;
    rep.sigma_q = sigma_q;
    {
        const auto prof = renewal_profile(config.noise.interarrival);
        const auto fam = default_weight_family(n, config.estimator, sigma_q);
        const auto c = oracle_constants(config.noise, prof, n, fam);
        rep.c1 = c.c1;
        rep.c2 = c.c2;
    }
    std::vector<double> col(M);
    for (std::size_t k = 0; k < b1_probes.size(); ++k) {
        for (std::size_t r = 0; r < M; ++r) col[r] = b1_vals[r * b1_probes.size() + k];
        const auto ms = mean_se(col);
        rep.b1.push_back({b1_probes[k].first, ms.mean, ms.se});
    }
    for (std::size_t k = 0; k < b2_probes.size(); ++k) {
        for (std::size_t r = 0; r < M; ++r) col[r] = b2_vals[r * b2_probes.size() + k];
        const auto centre = mean_se(col).mean;
        // E B_2^2 = Var(sum x_j xi_j^2); the squared deviations carry the SE.
        std::vector<double> sq(M);
        for (std::size_t r = 0; r < M; ++r) sq[r] = (col[r] - centre) * (col[r] - centre);
        const auto ms = mean_se(sq);
        const double unbiased = ms.mean * static_cast<double>(M) / static_cast<double>(M - 1);
        rep.b2_second_moment.push_back({b2_probes[k].first, unbiased, ms.se});
    }
    return rep;
}

ConvergenceFit convergence_fit(const RiskTable& table, const SobolevSpec& s) {
    if (table.rows.size() < 3) throw DomainError("convergence_fit: need at least 3 horizons");
    const auto m = static_cast<double>(table.rows.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& r : table.rows) {
        if (!(r.mean_risk > 0.0) || r.n < 1) throw DomainError("convergence_fit: risks and horizons must be positive");
        sx += std::log(r.n);
        sy += std::log(r.mean_risk);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : table.rows) {
        const double dx = std::log(r.n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.mean_risk) - my);
    }
    if (!(sxx > 0.0)) throw DomainError("convergence_fit: horizons are all equal");
    ConvergenceFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.target = -2.0 * s.k / (2.0 * s.k + 1.0);
    return fit;
}

}  // namespace smreg
