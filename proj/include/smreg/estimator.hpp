#pragma once

// Adaptive model selection over a family of Pinsker-type weight sequences.
//
// From a path on [0, n] the estimator forms theta_hat_j = (1/n) int Tr_j dy
// for j = 1..n, a variance-proxy estimate sigma_hat from the high-frequency
// coefficients, and picks the weight vector lambda minimising the penalised
// cost
//
//   J(lambda) = sum lambda_j^2 theta_hat_j^2 - 2 sum lambda_j theta_tilde_j
//               + delta * sigma_hat |lambda|^2 / n,
//   theta_tilde_j = theta_hat_j^2 - sigma_hat / n.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smreg/noise.hpp"

namespace smreg {

struct CoefficientEstimates {
    std::vector<double> theta_hat;  // j = 1..n at index j-1
    int n = 0;
};

// theta_hat_j = (1/n) sum_i Tr_j(t_{i-1}) Delta y_i, left endpoints.
CoefficientEstimates estimate_coefficients(const ObservationPath& path);

// sigma_hat = sum_{j=[sqrt n]+1}^{n} theta_hat_j^2. Throws DomainError for n < 2.
double variance_proxy(const CoefficientEstimates& est);
double variance_proxy(const ObservationPath& path);

struct WeightIndex {
    int beta = 1;      // 1..k_star
    double l = 0.0;    // one of eps, 2 eps, .., m eps
};

struct WeightFamily {
    int n = 0;
    std::vector<WeightIndex> alphas;
    std::vector<double> omegas;       // omega_alpha per alpha
    std::vector<int> supports;        // number of leading entries that may be non-zero
    std::vector<double> weights;      // row-major, alphas.size() x n
    double epsilon = 0.0;
    int k_star = 0;
    int m = 0;
    double varsigma_star = 1.0;
    double upsilon_n = 0.0;           // n / varsigma_star
    int j_star = 0;                   // 1 + [ln upsilon_n]
    std::size_t card = 0;             // k_star * m
    double lambda_norm_max = 0.0;     // 1 + max_alpha sum_j lambda_alpha(j)

    std::size_t size() const { return alphas.size(); }
    std::span<const double> weight(std::size_t alpha) const {
        return {weights.data() + alpha * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    }
};

// d_beta = (beta+1)(2 beta+1) / (pi^{2 beta} beta)
double pinsker_d(int beta);

// lambda_alpha(j) = 1 for j < j*, 1 - (j/omega)^beta for j* <= j <= omega,
// 0 otherwise, with omega = (d_beta l upsilon_n)^{1/(2 beta + 1)}.
WeightFamily build_weight_family(int n, double varsigma_star, double eps, int k_star, int m);

enum class MRule { LnSquared, InverseEpsSquared };
enum class DeltaRule { Simulation, Theory };

// Grid parameters as functions of n. Defaults reproduce the simulation study:
// k* = k0 + sqrt(ln n), eps = 1/ln n, m = [ln^2 n], delta = (3 + ln n)^-2.
struct EstimatorParams {
    int k_star0 = 100;
    std::optional<double> eps;          // default 1/ln n
    MRule m_rule = MRule::LnSquared;
    DeltaRule delta_rule = DeltaRule::Simulation;
    std::optional<double> delta;        // overrides delta_rule
    bool varsigma_plug_in = false;      // varsigma* := sigma_hat
    double varsigma_star = 1.0;
    std::optional<double> known_sigma;  // sigma_hat := sigma_Q

    double eps_for(int n) const;
    int k_star_for(int n) const;
    int m_for(int n) const;
    double delta_for(int n) const;
};

WeightFamily default_weight_family(int n, const EstimatorParams& params, double sigma_hat);

// Throws DomainError on length mismatch or delta <= 0.
double cost_function(const CoefficientEstimates& est, double sigma_hat,
                     std::span<const double> lambda, double delta);

// sigma_hat |lambda|^2 / n
double penalty(const CoefficientEstimates& est, double sigma_hat, std::span<const double> lambda);

struct SelectionReport {
    int n = 0;
    double sigma_hat = 0.0;
    double delta = 0.0;
    std::vector<double> costs;
    std::vector<double> penalties;
    std::size_t selected_alpha = 0;
    std::vector<double> theta_hat;
    std::vector<double> estimate_coeffs;  // lambda_hat(j) theta_hat_j
};

// First minimiser of the cost in grid order. Throws DomainError on an empty family.
SelectionReport select_model(const CoefficientEstimates& est, double sigma_hat,
                             const WeightFamily& family, double delta);
SelectionReport select_model(const ObservationPath& path, const WeightFamily& family, double delta);

// Full pipeline with the parameter rules applied for the path's horizon.
struct EstimationResult {
    WeightFamily family;
    SelectionReport report;
};
EstimationResult estimate(const ObservationPath& path, const EstimatorParams& params);

// S_hat(t) = sum_j c_j Tr_j(t) on the given points.
std::vector<double> reconstruct(std::span<const double> coeffs, std::span<const double> points);
std::vector<double> reconstruct(const SelectionReport& report, std::span<const double> points);

// True when delta lies in the range covered by the oracle inequality, (0, 1/6].
bool delta_in_theory_range(double delta);

}  // namespace smreg
