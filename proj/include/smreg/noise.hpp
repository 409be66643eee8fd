#pragma once

// Noise xi_t = rho1 L_t + rho2 z_t, where L is a Levy process (Brownian part
// plus compensated compound-Poisson jumps) and z is a semi-Markov jump
// process with renewal epochs T_k and i.i.d. marks Y_k. Paths are generated
// as increments on a uniform grid of p cells over [0, n].

#include <cstdint>
#include <optional>
#include <vector>

#include "smreg/distributions.hpp"
#include "smreg/random.hpp"
#include "smreg/signal.hpp"

namespace smreg {

// Compound-Poisson jump measure Pi = intensity * law(scale * X). The scale is
// chosen so that Pi(x^2) = 1.
struct JumpMeasureSpec {
    double intensity = 0.0;
    DistributionSpec size = DistributionSpec::normal(0.0, 1.0);

    double size_scale() const;
    // Pi(x^k) for k = 2 or 4 after normalisation.
    double moment(int k) const;
    // Compensator drift per unit time, intensity * scale * E X.
    double drift_rate() const;
};

struct NoiseModel {
    double rho1 = 0.5;
    double rho2 = 0.5;
    double rho_check = 1.0;  // Brownian fraction of L
    std::optional<JumpMeasureSpec> jumps;
    DistributionSpec interarrival = DistributionSpec::chi_squared(3.0);
    DistributionSpec marks = DistributionSpec::normal(0.0, 1.0);
    double beta = 0.25;  // exponential-moment probe for the inter-arrival law

    // Throws ConfigError when a constraint of the model is violated.
    void validate() const;

    double tau_bar() const { return interarrival.mean(); }
    // rho1^2 + rho2^2 / tau_bar
    double sigma_q() const;
    // E Y^4 of the marks.
    double mark_fourth_moment() const { return marks.raw_moment(4); }
    // Pi(x^4); zero when L carries no jump part.
    double jump_fourth_moment() const;
};

struct UniformGrid {
    int n = 1;                 // horizon
    std::int64_t cells = 10;   // p
    double step() const { return static_cast<double>(n) / static_cast<double>(cells); }
};

struct ObservationPath {
    int n = 0;
    std::int64_t p = 0;
    std::vector<double> increments;   // Delta y_i over ((i-1)h, ih]
    std::vector<double> jump_times;   // semi-Markov epochs T_k in (0, n]
    std::vector<double> marks;        // Y_k
    std::uint64_t seed = 0;

    double step() const { return static_cast<double>(n) / static_cast<double>(p); }
    UniformGrid grid() const { return {n, p}; }
    std::vector<double> cumulative() const;
    // Number of semi-Markov epochs in each cell.
    std::vector<int> jump_counts() const;
};

struct SemiMarkovSample {
    std::vector<double> increments;  // sum of marks per cell
    std::vector<double> jump_times;
    std::vector<double> marks;
};

// Grid cells per unit time used when a configuration leaves it open: every
// basis frequency up to n/2 stays below the grid Nyquist frequency.
int auto_cells_per_unit(int n);

// All renewal epochs T_k <= horizon. Throws ModelError on a non-positive draw.
std::vector<double> sample_renewal_times(const DistributionSpec& interarrival, double horizon,
                                         RandomStream& rng);

SemiMarkovSample sample_semi_markov_increments(const NoiseModel& model, const UniformGrid& grid,
                                               RandomStream& rng);

// Increments of L on the grid (unit scale; rho1 is applied by the caller).
std::vector<double> sample_levy_increments(const NoiseModel& model, const UniformGrid& grid,
                                           RandomStream& rng);

// Delta y_i = S(midpoint) h + rho1 Delta L_i + rho2 Delta z_i. Requires p >= 10 n.
ObservationPath simulate_observations(const SignalSpec& signal, const NoiseModel& model, int n,
                                      std::int64_t p, RandomStream& rng);

}  // namespace smreg
