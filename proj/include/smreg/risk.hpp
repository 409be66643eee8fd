#pragma once

// Monte Carlo risk harness, oracle-inequality constants and noise-functional
// diagnostics.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smreg/estimator.hpp"
#include "smreg/noise.hpp"
#include "smreg/renewal.hpp"
#include "smreg/signal.hpp"

namespace smreg {

struct ExperimentConfig {
    SignalSpec signal = SignalSpec::paper_test_signal();
    NoiseModel noise;
    std::vector<int> horizons{20, 100, 200, 1000};
    int cells_per_unit = 0;  // 0: auto_cells_per_unit(n)
    int replications = 200;
    int eval_points = 2001;
    std::uint64_t seed = 20170101;
    EstimatorParams estimator;

    // Throws ConfigError.
    void validate() const;
    std::int64_t cells_for(int n) const;

    void apply_paper_scale() {
        replications = 10000;
        eval_points = 100001;
    }
};

// (1/p) sum_{j=1}^{p} (S_hat(t_j) - S(t_j))^2 on t_j = j/p. Requires p >= 100
// and estimate.size() == p.
double empirical_risk(std::span<const double> estimate, const SignalSpec& signal, int eval_points);

// (1/p) sum_{j=0}^{p} S(j/p)^2, the normaliser of the relative risk.
double signal_norm_sq(const SignalSpec& signal, int eval_points);

// The empirical risk evaluated in coefficient space. On the grid j/p the
// basis functions up to index J < p are exactly orthonormal, so
//   (1/p) sum (S_hat - S)^2 = |c|^2 - 2 <c, s> + (1/p) sum S^2,
// with s the discrete coefficients of S. Equal to empirical_risk() on the
// reconstructed grid values up to rounding.
class RiskEvaluator {
public:
    RiskEvaluator(const SignalSpec& signal, int eval_points, int max_coeffs);

    int eval_points() const { return p_; }
    double risk_from_coefficients(std::span<const double> coeffs) const;
    double risk_from_grid(std::span<const double> values) const;
    // Evaluation grid t_j = j/p, j = 1..p.
    std::vector<double> grid() const;
    std::span<const double> signal_values() const { return values_; }

private:
    int p_;
    std::vector<double> values_;    // S(j/p), j = 1..p
    std::vector<double> discrete_;  // s_j
    double norm_grid_ = 0.0;
};

struct RiskRow {
    int n = 0;
    double mean_risk = 0.0;
    double relative_risk = 0.0;
    double std_error = 0.0;
    double wall_seconds = 0.0;
    int replications = 0;
};

struct RiskTable {
    std::vector<RiskRow> rows;
    double signal_norm = 0.0;
};

struct RunOptions {
    int jobs = 1;
    std::function<void(int n, int done, int total)> progress;
};

// Replication r of horizon n uses the substream (seed, n, r); per-replication
// risks are reduced in replication order, so the table is bit-reproducible
// for any number of jobs.
RiskTable run_monte_carlo(const ExperimentConfig& config, const RunOptions& options = {});

// Selected-estimator risks next to the mean risk of every fixed weight vector
// of the family, on the same replications.
struct FamilyComparison {
    int n = 0;
    int replications = 0;
    double delta = 0.0;
    double selected_mean = 0.0;
    double selected_se = 0.0;
    std::vector<double> per_alpha_mean;
    std::size_t best_alpha = 0;
    double best_mean = 0.0;
};
FamilyComparison compare_with_family(const ExperimentConfig& config, int n, const RunOptions& options = {});

struct OracleConstants {
    double kappa_q = 0.0;    // rho1^2 + rho2^2 |rho|_*
    double sigma_q = 0.0;    // rho1^2 + rho2^2 / tau_bar
    double psi_q = 0.0;
    double c_star_q = 0.0;
    double c1 = 0.0;         // sigma_Q tau_bar phi^2 |Upsilon|_1
    double c2 = 0.0;         // phi^4 (1 + sigma_Q^2)^3 l_check
    double l_check = 0.0;
    double phi_max = 0.0;
    double tau_bar = 0.0;
    double upsilon_l1 = 0.0;
    double rho_sup = 0.0;
    double mark_m4 = 0.0;    // E Y^4
    double jump_m4 = 0.0;    // Pi(x^4)
    double iota = 0.0;       // #Lambda
    double lambda_norm_max = 0.0;
};

// Throws RefusalError when the renewal profile did not converge.
OracleConstants oracle_constants(const NoiseModel& noise, const RenewalProfile& profile, int n,
                                 const WeightFamily& family);

struct ProbeEstimate {
    std::string label;
    double value = 0.0;
    double std_error = 0.0;
};

struct NoiseFunctionalReport {
    int n = 0;
    int replications = 0;
    double sigma_q = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    std::vector<ProbeEstimate> b1;              // B_1(x) for x in [-1, 1]^n
    std::vector<ProbeEstimate> b2_second_moment;  // E B_2(x)^2 for |x| <= 1
};

// xi_{j,n} = sqrt(n) (theta_hat_j - theta_j) over `replications` paths at
// horizon n (config.horizons.front() when n == 0). theta_j are the
// coefficients of the noiseless discretised path, so xi is exactly the
// discretised stochastic integral of the noise. Requires replications >= 1000.
NoiseFunctionalReport noise_functional_diagnostics(const ExperimentConfig& config, int replications,
                                                   int n = 0, const RunOptions& options = {});

struct ConvergenceFit {
    double slope = 0.0;
    double intercept = 0.0;
    double target = 0.0;  // -2k/(2k+1)
};

// Least-squares slope of log mean_risk against log n. Needs >= 3 rows and
// distinct horizons.
ConvergenceFit convergence_fit(const RiskTable& table, const SobolevSpec& s);

}  // namespace smreg
