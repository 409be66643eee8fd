// Acceptance checks. Each criterion prints one PASS/FAIL line with the measured
// value, the target and the pinned tolerance. Run one with --criterion NAME,
// list them with --list; without arguments every default criterion runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cli.hpp"
#include "smreg/estimator.hpp"
#include "smreg/io.hpp"
#include "smreg/noise.hpp"
#include "smreg/renewal.hpp"
#include "smreg/risk.hpp"
#include "smreg/signal.hpp"

using namespace smreg;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kReferenceBand = 0.35;
constexpr double kReferenceLongBand = 0.10;
constexpr double kMonotoneSlackSe = 3.0;
constexpr double kRuntimeLimitSeconds = 15.0 * 60.0;
constexpr double kNormTol = 1e-4;
constexpr double kExpRelTol = 1e-3;
constexpr double kErlangTol = 1e-3;
constexpr double kHistogramSe = 4.0;
constexpr double kHistogramBin = 0.25;
constexpr double kIsometrySe = 4.0;
constexpr double kRatioLow = 1.3;
constexpr double kRatioHigh = 3.0;
constexpr double kOracleSlackSe = 5.0;
constexpr double kNoiseSlackSe = 4.0;

int g_jobs = 1;

bool report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    return ok;
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    double var = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    for (double x : v) r.mean += x;
    r.mean /= v.size();
    for (double x : v) r.var += (x - r.mean) * (x - r.mean);
    r.var /= (v.size() - 1);
    r.se = std::sqrt(r.var / v.size());
    return r;
}

// --- risk table------------------------------------------------------------------

const std::map<int, double> kReferenceRisk{{20, 0.04430}, {100, 0.01290}, {200, 0.00812}, {1000, 0.00196}};

struct DeskTable {
    RiskTable table;
    double seconds = 0.0;
};

const DeskTable& desk_table() {
    static const DeskTable t = [] {
        ExperimentConfig c;
        c.horizons = {20, 100, 200};
        c.replications = 200;
        c.eval_points = 2001;
        const auto t0 = std::chrono::steady_clock::now();
        DeskTable d;
        d.table = run_monte_carlo(c, {g_jobs, {}});
        d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return d;
    }();
    return t;
}

bool table_row(const RiskTable& t, int n, double band, const std::string& name) {
    for (const auto& r : t.rows) {
        if (r.n != n) continue;
        const double target = kReferenceRisk.at(n);
        const double rel = r.mean_risk / target - 1.0;
        return report(name, std::abs(rel) <= band,
                      "R_bar=" + fmt("%.5f", r.mean_risk) + " (se " + fmt("%.5f", r.std_error) + ") target " +
                          fmt("%.5f", target) + " rel.dev " + fmt("%+.1f%%", 100 * rel) + " band +-" +
                          fmt("%.0f%%", 100 * band));
    }
    return report(name, false, "row missing");
}

bool risk_table_desk_n20() { return table_row(desk_table().table, 20, kReferenceBand, "risk_table_desk_n20"); }
bool risk_table_desk_n100() { return table_row(desk_table().table, 100, kReferenceBand, "risk_table_desk_n100"); }
bool risk_table_desk_n200() { return table_row(desk_table().table, 200, kReferenceBand, "risk_table_desk_n200"); }

bool risk_table_desk_monotone() {
    const auto& d = desk_table();
    bool ok = d.seconds < kRuntimeLimitSeconds;
    std::string detail;
    const auto& rows = d.table.rows;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double slack = kMonotoneSlackSe * std::hypot(rows[i].std_error, rows[i + 1].std_error);
        const bool step = rows[i + 1].mean_risk < rows[i].mean_risk + slack;
        ok = ok && step;
        detail += "R(" + std::to_string(rows[i].n) + ")=" + fmt("%.5f", rows[i].mean_risk) + (step ? " > " : " !> ");
    }
    detail += "R(" + std::to_string(rows.back().n) + ")=" + fmt("%.5f", rows.back().mean_risk) + "; runtime " +
              fmt("%.1f", d.seconds) + " s (limit 900 s)";
    return report("risk_table_desk_monotone", ok, detail);
}

bool risk_table_paper_scale() {
    ExperimentConfig c;
    c.apply_paper_scale();
    const auto t = run_monte_carlo(c, {g_jobs, {}});
    bool ok = true;
    for (int n : c.horizons) ok = table_row(t, n, kReferenceLongBand, "risk_table_paper_scale_n" + std::to_string(n)) && ok;
    return report("risk_table_paper_scale", ok, "N=10000, p=100001, all four rows within +-10%");
}

// --- signal norm -------------------------------------------------------------------

bool signal_norm() {
    const double v = signal_norm_sq(SignalSpec::paper_test_signal(), 100001);
    return report("signal_norm", std::abs(v - 0.1883601) <= kNormTol,
                  "||S||^2_p=" + fmt("%.7f", v) + " target 0.1883601 tol 1e-4");
}

// --- renewal ---------------------------------------------------------------------

bool renewal_exponential() {
    double worst = 0.0;
    for (double mu : {0.5, 1.0, 2.0}) {
        const auto p = renewal_profile(DistributionSpec::exponential(mu));
        for (double r : p.rho) worst = std::max(worst, std::abs(r - mu) / mu);
    }
    return report("renewal_exponential", worst <= kExpRelTol,
                  "max relative deviation " + fmt("%.2e", worst) + " tol 1e-3 (mu = 0.5, 1, 2)");
}

bool renewal_erlang2() {
    const auto p = renewal_profile(DistributionSpec::erlang(2, 2.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < p.rho.size(); ++i) {
        worst = std::max(worst, std::abs(p.rho[i] - (1.0 - std::exp(-4.0 * p.x(i)))));
    }
    return report("renewal_erlang2", worst <= kErlangTol,
                  "max |rho - (1 - e^{-4x})| = " + fmt("%.2e", worst) + " tol 1e-3");
}

bool renewal_chi2_histogram() {
    const auto law = DistributionSpec::chi_squared(3.0);
    const auto prof = renewal_profile(law);
    const double horizon = 15.0;
    const int bins = static_cast<int>(std::lround(horizon / kHistogramBin));
    const int M = 100000;
    std::vector<double> s(bins, 0.0), s2(bins, 0.0);
    std::vector<int> count(bins);
    for (int r = 0; r < M; ++r) {
        auto rng = RandomStream::derive(0x68697374, {static_cast<std::uint64_t>(r)});
        std::fill(count.begin(), count.end(), 0);
        for (double t : sample_renewal_times(law, horizon, rng)) {
            const int b = std::min(bins - 1, static_cast<int>(t / kHistogramBin));
            ++count[b];
        }
        for (int b = 0; b < bins; ++b) {
            s[b] += count[b];
            s2[b] += static_cast<double>(count[b]) * count[b];
        }
    }
    double worst = 0.0;
    int worst_bin = 0;
    for (int b = 0; b < bins; ++b) {
        const double mean = s[b] / M;
        const double se = std::sqrt(std::max(0.0, s2[b] / M - mean * mean) / (M - 1));
        // Expected epochs in the bin: integral of rho over it.
        const double a = b * kHistogramBin;
        const int sub = 200;
        double expected = 0.0;
        for (int k = 0; k < sub; ++k) expected += prof.at(a + (k + 0.5) * kHistogramBin / sub);
        expected *= kHistogramBin / sub;
        const double z = std::abs(mean - expected) / se;
        if (z > worst) {
            worst = z;
            worst_bin = b;
        }
    }
    return report("renewal_chi2_histogram", worst <= kHistogramSe,
                  "worst bin " + std::to_string(worst_bin) + " at " + fmt("%.2f SE", worst) + " (limit 4 SE, " +
                      std::to_string(bins) + " bins of width 0.25 on [0, 15], 1e5 paths)");
}

// --- isometry --------------------------------------------------------------------

bool isometry() {
    const int n = 50;
    const int M = 10000;
    NoiseModel model;
    const auto prof = renewal_profile(model.interarrival);
    const auto zero = SignalSpec::from_coefficients({0.0});
    const std::int64_t p = static_cast<std::int64_t>(auto_cells_per_unit(n)) * n;
    const std::vector<int> js{2, 5, 10};
    std::vector<std::vector<double>> vals(js.size(), std::vector<double>(M));
    for (int r = 0; r < M; ++r) {
        auto rng = RandomStream::derive(0x69736f, {static_cast<std::uint64_t>(r)});
        const auto est = estimate_coefficients(simulate_observations(zero, model, n, p, rng));
        for (std::size_t k = 0; k < js.size(); ++k) vals[k][r] = n * est.theta_hat[js[k] - 1];
    }
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < js.size(); ++k) {
        const int j = js[k];
        // rho1^2 int_0^n f^2 + rho2^2 int_0^n f^2 rho, midpoint rule with 2000 nodes per unit.
        const int Q = 2000 * n;
        double f2 = 0.0, f2rho = 0.0;
        for (int i = 0; i < Q; ++i) {
            const double t = (i + 0.5) * n / static_cast<double>(Q);
            const double f = trig_basis(j, t);
            f2 += f * f;
            f2rho += f * f * prof.at(t);
        }
        f2 *= static_cast<double>(n) / Q;
        f2rho *= static_cast<double>(n) / Q;
        const double target = model.rho1 * model.rho1 * f2 + model.rho2 * model.rho2 * f2rho;
        const auto ms = mean_se(vals[k]);
        double m4 = 0.0;
        for (double x : vals[k]) m4 += std::pow(x - ms.mean, 4);
        m4 /= M;
        const double se = std::sqrt((m4 - ms.var * ms.var) / M);
        const double z = std::abs(ms.var - target) / se;
        ok = ok && z <= kIsometrySe;
        detail += "Tr_" + std::to_string(j) + ": var " + fmt("%.4f", ms.var) + " vs " + fmt("%.4f", target) + " (" +
                  fmt("%.2f SE", z) + ") ";
    }
    return report("isometry", ok, detail + "limit 4 SE, n=50, 1e4 paths");
}

// --- variance proxy ----------------------------------------------------------------

bool variance_proxy_ratio() {
    const int M = 500;
    NoiseModel model;
    const auto sig = SignalSpec::paper_test_signal();
    auto mean_abs_err = [&](int n) {
        const std::int64_t p = static_cast<std::int64_t>(auto_cells_per_unit(n)) * n;
        std::vector<double> e(M);
        std::vector<std::thread> pool;
        const int jobs = std::max(1, std::min(g_jobs, M));
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (int r = w; r < M; r += jobs) {
                    auto rng = RandomStream::derive(0x7661722d, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
                    e[r] = std::abs(variance_proxy(simulate_observations(sig, model, n, p, rng)) - 1.0 / 3.0);
                }
            });
        }
        for (auto& t : pool) t.join();
        return mean_se(e).mean;
    };
    const double e100 = mean_abs_err(100);
    const double e400 = mean_abs_err(400);
    const double ratio = e100 / e400;
    return report("variance_proxy_ratio", ratio >= kRatioLow && ratio <= kRatioHigh,
                  "mean|sigma_hat - 1/3|: n=100 " + fmt("%.5f", e100) + ", n=400 " + fmt("%.5f", e400) + ", ratio " +
                      fmt("%.3f", ratio) + " band [1.3, 3.0]");
}

// --- weight family ---------------------------------------------------------------

bool weight_family() {
    bool ok = true;
    std::string detail;
    for (int n : {20, 1000}) {
        const EstimatorParams params;
        const auto f = default_weight_family(n, params, 0.0);
        std::size_t bad = 0;
        if (f.card != static_cast<std::size_t>(f.k_star) * f.m || f.size() != f.card) ++bad;
        double max_sum = 0.0;
        for (std::size_t a = 0; a < f.size(); ++a) {
            const auto w = f.weight(a);
            const double om = f.omegas[a];
            const int beta = f.alphas[a].beta;
            double sum = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double l = w[j - 1];
                sum += l;
                if (!(l >= 0.0 && l <= 1.0)) ++bad;
                if (j < f.j_star && l != 1.0) ++bad;
                if (j >= f.j_star && j <= om && l != 1.0 - std::pow(j / om, beta)) ++bad;
                if (j >= f.j_star && j > om && l != 0.0) ++bad;
                if (j > f.j_star && l > w[j - 2]) ++bad;
            }
            max_sum = std::max(max_sum, sum);
        }
        const double bound = 1.0 + std::pow(f.upsilon_n / f.epsilon, 1.0 / 3.0);
        if (f.lambda_norm_max != 1.0 + max_sum) ++bad;
        if (!(f.lambda_norm_max <= bound)) ++bad;
        ok = ok && bad == 0;
        detail += "n=" + std::to_string(n) + ": #Lambda=" + std::to_string(f.card) + "=" + std::to_string(f.k_star) +
                  "*" + std::to_string(f.m) + ", |Lambda|_*=" + fmt("%.3f", f.lambda_norm_max) + " <= " +
                  fmt("%.3f", bound) + ", violations " + std::to_string(bad) + "; ";
    }
    return report("weight_family", ok, detail + "exhaustive, no tolerance");
}

// --- oracle inequality ---------------------------------------------------------------

bool oracle_inequality() {
    ExperimentConfig c;
    c.replications = 500;
    c.eval_points = 2001;
    const int n = 100;
    const auto fc = compare_with_family(c, n, {g_jobs, {}});
    const double d = fc.delta;
    const double factor = (1.0 + 3.0 * d) / (1.0 - 3.0 * d);
    const double rhs = factor * fc.best_mean + kOracleSlackSe * fc.selected_se;
    return report("oracle_inequality", fc.selected_mean <= rhs,
                  "mean risk selected " + fmt("%.5f", fc.selected_mean) + " (se " + fmt("%.5f", fc.selected_se) +
                      ") <= " + fmt("%.4f", factor) + " * best fixed " + fmt("%.5f", fc.best_mean) + " + 5 SE = " +
                      fmt("%.5f", rhs) + " (n=100, 500 reps)");
}

// --- noise functionals ---------------------------------------------------------------

bool noise_functionals() {
    ExperimentConfig c;
    const auto r = noise_functional_diagnostics(c, 2000, 50, {g_jobs, {}});
    bool ok = true;
    double worst_b1 = 0.0, worst_b2 = 0.0;
    for (const auto& p : r.b1) {
        ok = ok && std::abs(p.value) <= r.c1 + kNoiseSlackSe * p.std_error;
        worst_b1 = std::max(worst_b1, std::abs(p.value));
    }
    for (const auto& p : r.b2_second_moment) {
        ok = ok && p.value <= r.c2 + kNoiseSlackSe * p.std_error;
        worst_b2 = std::max(worst_b2, p.value);
    }
    return report("noise_functionals", ok,
                  "max|B1|=" + fmt("%.4f", worst_b1) + " <= C1=" + fmt("%.4f", r.c1) + ", max E B2^2=" +
                      fmt("%.4f", worst_b2) + " <= C2=" + fmt("%.1f", r.c2) + " (+4 SE, n=50, 2000 paths, " +
                      std::to_string(r.b1.size()) + "+" + std::to_string(r.b2_second_moment.size()) + " probes)");
}

// --- determinism -------------------------------------------------------------------

bool determinism() {
    const auto base = fs::temp_directory_path() / "smreg_acceptance_determinism";
    fs::remove_all(base);
    std::ostringstream sink;
    auto run = [&](const fs::path& dir) {
        const std::string d = dir.string();
        int rc = 0;
        rc |= cli::run({"--output-dir", (dir / "sim").string(), "--seed", "123", "simulate", "--n", "20", "--paths", "2"},
                       sink, sink);
        rc |= cli::run({"--output-dir", (dir / "est").string(), "estimate", "--path",
                        (dir / "sim" / "path_n20_r0.csv").string(), "--overlay"},
                       sink, sink);
        rc |= cli::run({"--output-dir", (dir / "mc").string(), "--seed", "123", "--jobs", std::to_string(g_jobs),
                        "mc-table", "--horizons", "20,50", "--replications", "20"},
                       sink, sink);
        rc |= cli::run({"--output-dir", (dir / "ren").string(), "renewal", "--dist", "chi2:3"}, sink, sink);
        rc |= cli::run({"--output-dir", (dir / "con").string(), "constants", "--n", "50"}, sink, sink);
        return rc;
    };
    if (run(base / "a") != 0 || run(base / "b") != 0) return report("determinism", false, "a CLI run failed");
    std::size_t compared = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), base / "a");
        auto ja = io::read_text(e.path());
        auto jb = io::read_text(base / "b" / rel);
        if (rel.filename() == "manifest.json") {
            // Timestamps are the only fields allowed to differ.
            auto ma = io::json::parse(ja), mb = io::json::parse(jb);
            for (auto* m : {&ma, &mb}) {
                m->erase("started");
                m->erase("finished");
                (*m)["config"].erase("path");
            }
            ja = ma.dump();
            jb = mb.dump();
        } else if (rel.filename() == "risk_table.csv") {
            // Drop the wall-time column.
            auto strip = [](const std::string& s) {
                std::istringstream in(s);
                std::string line, out;
                while (std::getline(in, line)) {
                    std::vector<std::string> cells;
                    std::stringstream ls(line);
                    std::string cell;
                    while (std::getline(ls, cell, ',')) cells.push_back(cell);
                    cells.erase(cells.begin() + 4);
                    for (auto& c : cells) out += c + ",";
                    out += "\n";
                }
                return out;
            };
            ja = strip(ja);
            jb = strip(jb);
        }
        ++compared;
        if (ja != jb) {
            ++differing;
            std::printf("  differs: %s\n", rel.string().c_str());
        }
    }
    fs::remove_all(base);
    return report("determinism", compared >= 14 && differing == 0,
                  std::to_string(compared) + " artifacts compared byte-for-byte across two seeded runs, " +
                      std::to_string(differing) + " differ (timestamps and wall time excluded)");
}

struct Criterion {
    std::function<bool()> run;
    bool long_run = false;
};

const std::map<std::string, Criterion>& criteria() {
    static const std::map<std::string, Criterion> c{
        {"risk_table_desk_n20", {risk_table_desk_n20}},
        {"risk_table_desk_n100", {risk_table_desk_n100}},
        {"risk_table_desk_n200", {risk_table_desk_n200}},
        {"risk_table_desk_monotone", {risk_table_desk_monotone}},
        {"risk_table_paper_scale", {risk_table_paper_scale, true}},
        {"signal_norm", {signal_norm}},
        {"renewal_exponential", {renewal_exponential}},
        {"renewal_chi2_histogram", {renewal_chi2_histogram}},
        {"renewal_erlang2", {renewal_erlang2}},
        {"isometry", {isometry}},
        {"variance_proxy_ratio", {variance_proxy_ratio}},
        {"weight_family", {weight_family}},
        {"oracle_inequality", {oracle_inequality}},
        {"noise_functionals", {noise_functionals}},
        {"determinism", {determinism}},
    };
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smreg acceptance criteria"};
    std::vector<std::string> selected;
    bool list = false;
    bool with_long = false;
    g_jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--criterion", selected, "Criterion to run (repeatable)");
    app.add_flag("--list", list, "List criteria");
    app.add_flag("--long", with_long, "Include opt-in long runs when running all");
    app.add_option("--jobs", g_jobs, "Worker threads");
    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& [name, c] : criteria()) std::printf("%s%s\n", name.c_str(), c.long_run ? " (long)" : "");
        return 0;
    }
    if (selected.empty()) {
        for (const auto& [name, c] : criteria()) {
            if (!c.long_run || with_long) selected.push_back(name);
        }
    }
    int failed = 0;
    for (const auto& name : selected) {
        auto it = criteria().find(name);
        if (it == criteria().end()) {
            std::printf("FAIL %s: unknown criterion\n", name.c_str());
            ++failed;
            continue;
        }
        try {
            if (!it->second.run()) ++failed;
        } catch (const std::exception& e) {
            report(name, false, std::string("exception: ") + e.what());
            ++failed;
        }
    }
    return failed == 0 ? 0 : 1;
}
