#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "smreg/errors.hpp"
#include "smreg/estimator.hpp"
#include "smreg/noise.hpp"
#include "smreg/signal.hpp"

using namespace smreg;

namespace {

ObservationPath noiseless_path(const SignalSpec& s, int n, std::int64_t p) {
    NoiseModel quiet;
    quiet.rho1 = 0.0;
    quiet.rho2 = 0.0;
    RandomStream rng(0);
    return simulate_observations(s, quiet, n, p, rng);
}

CoefficientEstimates make_est(std::vector<double> th) {
    CoefficientEstimates e;
    e.n = static_cast<int>(th.size());
    e.theta_hat = std::move(th);
    return e;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("coefficient estimates against a direct-summation oracle") {
    // dy_i = 0.01 sin(i+1) + 0.002 i on 60 cells of [0, 3]; mpmath sums.
    ObservationPath path;
    path.n = 3;
    path.p = 60;
    for (int i = 0; i < 60; ++i) path.increments.push_back(0.01 * std::sin(i + 1.0) + 0.002 * i);
    const auto est = estimate_coefficients(path);
    REQUIRE(est.theta_hat.size() == 3);
    CHECK(est.theta_hat[0] == doctest::Approx(1.1854484289454329012).epsilon(1e-13));
    CHECK(est.theta_hat[1] == doctest::Approx(-0.020168573624966841313).epsilon(1e-12));
    CHECK(est.theta_hat[2] == doctest::Approx(-0.18178512378640839933).epsilon(1e-12));
    // Same increments on a grid that does not divide into whole periods.
    path.p = 61;
    path.increments.push_back(0.0);
    const auto odd = estimate_coefficients(path);
    double direct = 0.0;
    for (int i = 0; i < 61; ++i) direct += trig_basis(2, i * 3.0 / 61.0) * path.increments[i];
    CHECK(odd.theta_hat[1] == doctest::Approx(direct / 3.0).epsilon(1e-13));
}

TEST_CASE("noiseless paths") {
    const auto tr2 = estimate_coefficients(noiseless_path(SignalSpec::from_coefficients({0.0, 1.0}), 10, 10000));
    CHECK(tr2.theta_hat[1] == doctest::Approx(1.0).epsilon(1e-4));
    for (int j = 0; j < 10; ++j) {
        if (j != 1) CHECK(std::abs(tr2.theta_hat[j]) < 5e-3);
    }
    const auto zero = estimate_coefficients(noiseless_path(SignalSpec::from_coefficients({0.0}), 10, 1000));
    for (double t : zero.theta_hat) CHECK(t == 0.0);
    CHECK(variance_proxy(zero) == 0.0);
    ObservationPath one;
    one.n = 1;
    one.p = 10;
    one.increments.assign(10, 0.1);
    CHECK_THROWS_AS(estimate_coefficients(one), DomainError);
}

TEST_CASE("variance proxy definition") {
    const auto e = make_est({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});  // [sqrt 10] = 3
    CHECK(variance_proxy(e) == doctest::Approx(16 + 25 + 36 + 49 + 64 + 81 + 100));
}

TEST_CASE("unbiased coefficients over noisy replications") {
    NoiseModel m;
    const auto sig = SignalSpec::paper_test_signal();
    const int n = 10;
    const int M = 10000;
    const auto exact = estimate_coefficients(noiseless_path(sig, n, 1000)).theta_hat;
    std::vector<double> s(n, 0.0), s2(n, 0.0);
    for (int r = 0; r < M; ++r) {
        auto rng = RandomStream::derive(5, {static_cast<std::uint64_t>(r)});
        const auto th = estimate_coefficients(simulate_observations(sig, m, n, 1000, rng)).theta_hat;
        for (int j = 0; j < n; ++j) {
            s[j] += th[j];
            s2[j] += th[j] * th[j];
        }
    }
    for (int j = 0; j < n; ++j) {
        const double mean = s[j] / M;
        const double se = std::sqrt((s2[j] / M - mean * mean) / M);
        CHECK(std::abs(mean - exact[j]) < 4.0 * se);
    }
}

TEST_CASE("variance proxy approaches sigma_Q") {
    NoiseModel m;
    const auto sig = SignalSpec::paper_test_signal();
    const int n = 1000;
    const int M = 100;
    std::vector<double> v(M);
    for (int r = 0; r < M; ++r) {
        auto rng = RandomStream::derive(8, {static_cast<std::uint64_t>(r)});
        v[r] = variance_proxy(simulate_observations(sig, m, n, static_cast<std::int64_t>(auto_cells_per_unit(n)) * n, rng));
    }
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= M;
    for (double x : v) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (M - 1) / M);
    // sum_{j > [sqrt n]} E xi_j^2 / n covers n - [sqrt n] of the n noise
    // terms, so the finite-n mean sits at (1 - [sqrt n]/n) sigma_Q; the signal
    // tail sum_{j > 31} theta_j^2 is below 1e-4 here.
    const double expected = (1.0 - 31.0 / n) / 3.0;
    CHECK(std::abs(mean - expected) < 4.0 * se + 1e-4);
    CHECK(std::abs(mean - 1.0 / 3.0) < 0.05);
}

TEST_CASE("weight family structure") {
    const int n = 20;
    const double eps = 1.0 / std::log(20.0);
    const auto f = build_weight_family(n, 1.0, eps, 3, 8);
    CHECK(f.card == 24);
    CHECK(f.size() == 24);
    CHECK(f.j_star == 3);
    CHECK(f.upsilon_n == 20.0);
    // omega from mpmath.
    CHECK(f.omegas[0] == doctest::Approx(1.5951180673371770356).epsilon(1e-13));
    CHECK(f.omegas[7] == doctest::Approx(3.1902361346743540711).epsilon(1e-13));
    CHECK(f.omegas[8] == doctest::Approx(0.87538228584051965588).epsilon(1e-13));
    CHECK(f.omegas[15] == doctest::Approx(1.3268314326782163165).epsilon(1e-13));
    CHECK(pinsker_d(1) == doctest::Approx(0.607927101854026629).epsilon(1e-14));
    CHECK(pinsker_d(2) == doctest::Approx(0.0769948669101325139).epsilon(1e-14));
    for (std::size_t a = 0; a < f.size(); ++a) {
        const auto w = f.weight(a);
        const double om = f.omegas[a];
        CHECK(w[0] == 1.0);
        CHECK(w[1] == 1.0);
        const int jc = static_cast<int>(std::ceil(om));
        if (jc > om && jc >= f.j_star && jc <= n) CHECK(w[jc - 1] == 0.0);
        const int jf = static_cast<int>(std::floor(om));
        if (jf >= f.j_star && jf <= n) {
            CHECK(w[jf - 1] >= 0.0);
            CHECK(w[jf - 1] < 1.0);
        }
    }
    CHECK_THROWS_AS(build_weight_family(1, 1.0, 0.5, 1, 1), DomainError);
    CHECK_THROWS_AS(build_weight_family(10, 0.0, 0.5, 1, 1), DomainError);
    CHECK_THROWS_AS(build_weight_family(10, 1.0, 1.5, 1, 1), DomainError);
    CHECK_THROWS_AS(build_weight_family(10, 1.0, 0.5, 0, 1), DomainError);
    CHECK_THROWS_AS(build_weight_family(10, 1.0, 0.5, 1, 0), DomainError);
}

TEST_CASE("default grid parameters") {
    EstimatorParams p;
    const double l = std::log(100.0);
    CHECK(p.eps_for(100) == doctest::Approx(1.0 / l));
    CHECK(p.k_star_for(100) == 102);
    CHECK(p.m_for(100) == 21);
    CHECK(p.delta_for(100) == doctest::Approx(1.0 / ((3 + l) * (3 + l))));
    p.delta_rule = DeltaRule::Theory;
    CHECK(p.delta_for(100) == doctest::Approx(1.0 / (6 + l)));
    p.m_rule = MRule::InverseEpsSquared;
    p.eps = 0.1;
    CHECK(p.m_for(100) == 100);
    CHECK(delta_in_theory_range(1.0 / 6.0));
    CHECK_FALSE(delta_in_theory_range(0.2));
}

TEST_CASE("cost function") {
    const auto e = make_est({0.9, -0.3, 0.25, 0.1, -0.05, 0.02, 0.01, -0.004});
    const std::vector<double> zero(8, 0.0);
    CHECK(cost_function(e, 0.4, zero, 0.05) == 0.0);
    // Brute-force mpmath summation in reverse order.
    const std::vector<std::vector<double>> lams{{1, 1, 1, 1, 1, 1, 1, 1},
                                                {1, 1, 1, 0.5, 0.25, 0, 0, 0},
                                                {1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3}};
    const std::vector<double> oracle{-0.15551599999999998809, -0.58781250000000001252, -0.44117216000000000472};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(cost_function(e, 0.4, lams[i], 0.05) - oracle[i]) < 1e-12);
    }
    CHECK(penalty(e, 0.4, lams[0]) == doctest::Approx(0.4));
    // sigma_hat = 0: J = -sum lambda^2 theta^2 for 0/1 vectors, so all ones wins.
    CHECK(cost_function(e, 0.0, lams[0], 1.0) <= cost_function(e, 0.0, lams[1], 1.0));
    CHECK_THROWS_AS(cost_function(e, 0.4, std::vector<double>(3, 1.0), 0.05), DomainError);
    CHECK_THROWS_AS(cost_function(e, 0.4, zero, 0.0), DomainError);
}

TEST_CASE("selection rules") {
    const auto e = make_est({0.9, -0.3, 0.25, 0.1, -0.05, 0.02, 0.01, -0.004});
    auto f = build_weight_family(8, 1.0, 0.5, 1, 1);
    REQUIRE(f.size() == 1);
    auto r = select_model(e, 0.4, f, 0.05);
    CHECK(r.selected_alpha == 0);
    // Duplicate the weight: the first index wins.
    f.alphas.push_back(f.alphas[0]);
    f.omegas.push_back(f.omegas[0]);
    f.supports.push_back(f.supports[0]);
    f.weights.insert(f.weights.end(), f.weights.begin(), f.weights.begin() + 8);
    r = select_model(e, 0.4, f, 0.05);
    CHECK(r.selected_alpha == 0);
    CHECK(r.costs[0] == r.costs[1]);
    WeightFamily empty;
    empty.n = 8;
    CHECK_THROWS_AS(select_model(e, 0.4, empty, 0.05), DomainError);
}

TEST_CASE("selection optimality and report consistency") {
    NoiseModel m;
    RandomStream rng(17);
    const auto path = simulate_observations(SignalSpec::paper_test_signal(), m, 100, 20000, rng);
    const EstimatorParams params;
    const auto res = estimate(path, params);
    const auto& r = res.report;
    REQUIRE(r.costs.size() == res.family.size());
    for (std::size_t a = 0; a < r.costs.size(); ++a) {
        CHECK(r.costs[r.selected_alpha] <= r.costs[a]);
        if (a < r.selected_alpha) CHECK(r.costs[a] > r.costs[r.selected_alpha]);
    }
    const auto est = estimate_coefficients(path);
    const auto w = res.family.weight(r.selected_alpha);
    for (int j = 0; j < 100; ++j) CHECK(r.estimate_coeffs[j] == doctest::Approx(w[j] * est.theta_hat[j]));
    for (std::size_t a = 0; a < r.costs.size(); a += 97) {
        CHECK(r.costs[a] == doctest::Approx(cost_function(est, r.sigma_hat, res.family.weight(a), r.delta)).epsilon(1e-12));
    }
}

TEST_CASE("known sigma mode") {
    NoiseModel m;
    RandomStream rng(3);
    const auto path = simulate_observations(SignalSpec::paper_test_signal(), m, 50, 5000, rng);
    EstimatorParams p;
    p.known_sigma = 1.0 / 3.0;
    CHECK(estimate(path, p).report.sigma_hat == 1.0 / 3.0);
    p.known_sigma.reset();
    p.varsigma_plug_in = true;
    const auto r = estimate(path, p);
    CHECK(r.family.varsigma_star == doctest::Approx(std::max(r.report.sigma_hat, 1.0 / 50)));
}

TEST_CASE("noiseless Tr_2 selection error") {
    const auto sig = SignalSpec::from_coefficients({0.0, 1.0});
    const auto path = noiseless_path(sig, 200, 200LL * 402);
    const auto res = estimate(path, EstimatorParams{});
    double err = 0.0;
    for (int j = 0; j < 200; ++j) {
        const double truth = j == 1 ? 1.0 : 0.0;
        err += (res.report.estimate_coeffs[j] - truth) * (res.report.estimate_coeffs[j] - truth);
    }
    CHECK(err <= 1e-2);
}

TEST_CASE("reconstruction") {
    std::vector<double> pts(100000);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = static_cast<double>(i) / pts.size();
    const auto z = reconstruct(std::vector<double>(5, 0.0), pts);
    for (double v : z) CHECK(v == 0.0);
    const auto c = reconstruct(std::vector<double>{0.7}, std::span<const double>(pts).first(10));
    for (double v : c) CHECK(v == 0.7);
    const std::vector<double> coeffs{0.2, -0.5, 0.3, 0.0, 0.1, 0.05};
    const auto s = reconstruct(coeffs, pts);
    double q = 0.0;
    for (double v : s) q += v * v;
    double norm = 0.0;
    for (double v : coeffs) norm += v * v;
    CHECK(std::abs(q / pts.size() - norm) < 1e-6);
}

}
