#include "smreg/noise.hpp"

#include <algorithm>
#include <cmath>

#include "smreg/errors.hpp"

namespace smreg {
namespace {

std::int64_t cell_of(double t, double h, std::int64_t cells) {
    auto idx = static_cast<std::int64_t>(std::ceil(t / h)) - 1;
    return std::clamp<std::int64_t>(idx, 0, cells - 1);
}

}  // namespace

double JumpMeasureSpec::size_scale() const {
    const double m2 = intensity * size.raw_moment(2);
    if (!(m2 > 0.0)) throw ConfigError("jump measure cannot be normalised to Pi(x^2) = 1");
    return 1.0 / std::sqrt(m2);
}

double JumpMeasureSpec::moment(int k) const {
    if (k != 2 && k != 4) throw DomainError("jump measure moments available for k = 2, 4");
    return intensity * std::pow(size_scale(), k) * size.raw_moment(k);
}

double JumpMeasureSpec::drift_rate() const { return intensity * size_scale() * size.mean(); }

void NoiseModel::validate() const {
    if (!std::isfinite(rho1) || !std::isfinite(rho2)) throw ConfigError("noise scales must be finite");
    if (!(rho_check >= 0.0 && rho_check <= 1.0)) throw ConfigError("noise.rho_check must lie in [0, 1]");
    if (rho_check < 1.0) {
        if (!jumps || !(jumps->intensity > 0.0)) {
            throw ConfigError("noise.jumps: rho_check < 1 needs a jump measure with positive intensity");
        }
        (void)jumps->size_scale();
    }
    if (std::abs(marks.mean()) > 1e-12 || std::abs(marks.raw_moment(2) - 1.0) > 1e-9) {
        throw ConfigError("noise.marks must have mean 0 and variance 1, got " + marks.describe());
    }
    if (!interarrival.strictly_positive()) {
        throw ConfigError("noise.interarrival must be a strictly positive law, got " +
                          interarrival.describe());
    }
    if (!(beta > 0.0)) throw ConfigError("noise.beta must be positive");
    if (!interarrival.mgf(beta)) {
        throw ConfigError("noise.interarrival has no exponential moment at beta = " +
                          std::to_string(beta));
    }
}

double NoiseModel::sigma_q() const { return rho1 * rho1 + rho2 * rho2 / tau_bar(); }

double NoiseModel::jump_fourth_moment() const {
    if (!jumps || rho_check >= 1.0) return 0.0;
    return jumps->moment(4);
}

std::vector<double> ObservationPath::cumulative() const {
    std::vector<double> y(increments.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        acc += increments[i];
        y[i] = acc;
    }
    return y;
}

std::vector<int> ObservationPath::jump_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(p), 0);
    const double h = step();
    for (double t : jump_times) ++counts[static_cast<std::size_t>(cell_of(t, h, p))];
    return counts;
}

int auto_cells_per_unit(int n) { return std::max(100, 2 * n + 2); }

std::vector<double> sample_renewal_times(const DistributionSpec& interarrival, double horizon,
                                         RandomStream& rng) {
    if (!(horizon > 0.0)) throw DomainError("sample_renewal_times: horizon must be positive");
    std::vector<double> times;
    double t = 0.0;
    for (;;) {
        const double tau = interarrival.sample(rng);
        if (!(tau > 0.0)) throw ModelError("inter-arrival law produced a non-positive draw");
        t += tau;
        if (t > horizon) break;
        times.push_back(t);
    }
    return times;
}

SemiMarkovSample sample_semi_markov_increments(const NoiseModel& model, const UniformGrid& grid,
                                               RandomStream& rng) {
    if (grid.cells < 1 || grid.n < 1) throw DomainError("grid needs positive horizon and cells");
    SemiMarkovSample out;
    out.increments.assign(static_cast<std::size_t>(grid.cells), 0.0);
    out.jump_times = sample_renewal_times(model.interarrival, grid.n, rng);
    out.marks.reserve(out.jump_times.size());
    const double h = grid.step();
    for (double t : out.jump_times) {
        const double y = model.marks.sample(rng);
        out.marks.push_back(y);
        out.increments[static_cast<std::size_t>(cell_of(t, h, grid.cells))] += y;
    }
    return out;
}

std::vector<double> sample_levy_increments(const NoiseModel& model, const UniformGrid& grid,
                                           RandomStream& rng) {
    if (grid.cells < 1 || grid.n < 1) throw DomainError("grid needs positive horizon and cells");
    const auto p = static_cast<std::size_t>(grid.cells);
    const double h = grid.step();
    std::vector<double> dl(p, 0.0);

    if (model.rho_check > 0.0) {
        const double sd = model.rho_check * std::sqrt(h);
        for (auto& v : dl) v = sd * rng.normal();
    }
    if (model.rho_check < 1.0) {
        if (!model.jumps || !(model.jumps->intensity > 0.0)) {
            throw ConfigError("jump part requested but Pi(x^2) = 1 cannot hold without jumps");
        }
        const auto& jm = *model.jumps;
        const double w = std::sqrt(1.0 - model.rho_check * model.rho_check);
        const double scale = jm.size_scale();
        const double drift = jm.drift_rate() * h;
        std::exponential_distribution<double> gap(jm.intensity);
        double t = gap(rng.engine());
        while (t <= grid.n) {
            dl[static_cast<std::size_t>(cell_of(t, h, grid.cells))] += w * scale * jm.size.sample(rng);
            t += gap(rng.engine());
        }
        for (auto& v : dl) v -= w * drift;
    }
    return dl;
}

ObservationPath simulate_observations(const SignalSpec& signal, const NoiseModel& model, int n,
                                      std::int64_t p, RandomStream& rng) {
    if (n < 1) throw DomainError("simulate_observations: n must be >= 1");
    if (p < 10LL * n) throw DomainError("simulate_observations: need p >= 10 n grid cells");
    const UniformGrid grid{n, p};
    const double h = grid.step();

    ObservationPath path;
    path.n = n;
    path.p = p;
    path.seed = rng.seed();
    path.increments.resize(static_cast<std::size_t>(p));
    // The signal is 1-periodic; tabulate one period when the grid allows it.
    if (p % n == 0) {
        const auto q = p / n;
        std::vector<double> one(static_cast<std::size_t>(q));
        for (std::int64_t r = 0; r < q; ++r) one[r] = signal((r + 0.5) / static_cast<double>(q)) * h;
        for (std::int64_t i = 0; i < p; ++i) path.increments[i] = one[i % q];
    } else {
        for (std::int64_t i = 0; i < p; ++i) path.increments[i] = signal((i + 0.5) * h) * h;
    }

    if (model.rho2 != 0.0) {
        auto sm = sample_semi_markov_increments(model, grid, rng);
        for (std::size_t i = 0; i < sm.increments.size(); ++i) {
            path.increments[i] += model.rho2 * sm.increments[i];
        }
        path.jump_times = std::move(sm.jump_times);
        path.marks = std::move(sm.marks);
    }
    if (model.rho1 != 0.0) {
        const auto dl = sample_levy_increments(model, grid, rng);
        for (std::size_t i = 0; i < dl.size(); ++i) path.increments[i] += model.rho1 * dl[i];
    }
    return path;
}

}  // namespace smreg
