#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "smreg/errors.hpp"
#include "smreg/io.hpp"
#include "smreg/kernels.hpp"
#include "smreg/renewal.hpp"
#include "smreg/risk.hpp"

namespace smreg::cli {
namespace fs = std::filesystem;
using io::json;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    int jobs = 0;
    std::string output_dir = ".";
    bool paper_scale = false;
};

struct SimulateOpts {
    std::string config;
    int n = 0;
    int paths = 1;
};

struct EstimateOpts {
    std::string path;
    std::string config;
    std::optional<double> eps;
    std::optional<double> delta;
    std::optional<double> varsigma;
    bool plug_in = false;
    std::optional<int> eval_points;
    bool overlay = false;
};

struct TableOpts {
    std::string config;
    std::vector<int> horizons;
    std::optional<int> replications;
    std::optional<int> eval_points;
    std::optional<int> cells_per_unit;
    bool dry_run = false;
};

struct RenewalOpts {
    std::string dist = "chi2:3";
    double beta = 0.25;
    double steps_per_mean = 500.0;
    double truncation_mult = 20.0;
};

struct ConstantsOpts {
    std::string config;
    int n = 0;
};

// Precedence: built-in defaults < config file < --paper-scale < explicit flags.
ExperimentConfig resolve_config(const std::string& file, const Globals& g) {
    ExperimentConfig c = file.empty() ? ExperimentConfig{} : io::load_config(file);
    if (g.paper_scale) c.apply_paper_scale();
    if (g.seed) c.seed = *g.seed;
    return c;
}

int jobs_for(const Globals& g) {
    if (g.jobs > 0) return g.jobs;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

io::RunManifest start_manifest(const std::string& command, std::uint64_t seed) {
    io::RunManifest m;
    m.command = command;
    m.seed = seed;
    m.tool_version = SMREG_VERSION;
    m.started = io::timestamp_utc();
    return m;
}

void emit(const fs::path& dir, const std::string& name, const std::string& content, io::RunManifest& m) {
    io::write_text_atomic(dir / name, content);
    m.outputs.push_back(name);
}

void finish(const fs::path& dir, io::RunManifest& m) {
    m.finished = io::timestamp_utc();
    io::write_manifest(dir, m);
}

int cmd_simulate(const Globals& g, const SimulateOpts& o, std::ostream& out) {
    auto cfg = resolve_config(o.config, g);
    const int n = o.n > 0 ? o.n : cfg.horizons.front();
    if (n < 2) throw ConfigError("--n must be >= 2");
    if (o.paths < 1) throw ConfigError("--paths must be >= 1");
    const fs::path dir = g.output_dir;
    auto m = start_manifest("simulate", cfg.seed);
    m.config = io::to_json(cfg);
    m.config["simulate"] = {{"n", n}, {"paths", o.paths}, {"cells", cfg.cells_for(n)}};
    for (int r = 0; r < o.paths; ++r) {
        auto rng = RandomStream::derive(cfg.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
        const auto path = simulate_observations(cfg.signal, cfg.noise, n, cfg.cells_for(n), rng);
        const auto name = "path_n" + std::to_string(n) + "_r" + std::to_string(r) + ".csv";
        emit(dir, name, io::path_csv(path), m);
        out << "wrote " << (dir / name).string() << " (" << path.p << " rows)\n";
    }
    finish(dir, m);
    return kExitOk;
}

int cmd_estimate(const Globals& g, const EstimateOpts& o, std::ostream& out, std::ostream& err) {
    auto cfg = resolve_config(o.config, g);
    auto& params = cfg.estimator;
    if (o.eps) params.eps = *o.eps;
    if (o.delta) params.delta = *o.delta;
    if (o.varsigma) params.varsigma_star = *o.varsigma;
    if (o.plug_in) params.varsigma_plug_in = true;
    if (o.eval_points) cfg.eval_points = *o.eval_points;
    cfg.validate();

    const auto path = io::parse_path_csv(io::read_text(o.path));
    if (path.n < 2) throw ConfigError("path horizon must be >= 2");
    if (path.p < 10LL * path.n) throw ConfigError("path needs at least 10 cells per unit time");
    if (path.p / path.n <= path.n) {
        err << "warning: " << path.p / path.n << " cells per unit time alias the top basis frequencies (need > "
            << path.n << ")\n";
    }
    if (!delta_in_theory_range(params.delta_for(path.n))) {
        err << "warning: delta = " << io::format_double(params.delta_for(path.n))
            << " lies outside (0, 1/6], where the oracle inequality is stated\n";
    }
    const auto result = estimate(path, params);

    const fs::path dir = g.output_dir;
    auto m = start_manifest("estimate", cfg.seed);
    m.config = {{"path", o.path}, {"estimator", io::to_json(params)}, {"eval_points", cfg.eval_points}};
    if (o.overlay) m.config["signal"] = io::to_json(cfg.signal);
    emit(dir, "report.json", io::report_json(result.report, result.family).dump(2) + "\n", m);
    emit(dir, "costs.csv", io::cost_csv(result.report, result.family), m);

    std::vector<double> t(static_cast<std::size_t>(cfg.eval_points));
    for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<double>(j + 1) / cfg.eval_points;
    const auto s_hat = reconstruct(result.report, t);
    std::vector<double> s_true;
    if (o.overlay) {
        s_true.resize(t.size());
        for (std::size_t j = 0; j < t.size(); ++j) s_true[j] = cfg.signal(t[j]);
    }
    emit(dir, "estimate.csv", io::estimate_csv(t, s_hat, s_true), m);
    finish(dir, m);

    const auto& a = result.family.alphas[result.report.selected_alpha];
    out << "n=" << path.n << " sigma_hat=" << io::format_double(result.report.sigma_hat) << " selected beta=" << a.beta
        << " l=" << io::format_double(a.l) << " omega=" << io::format_double(result.family.omegas[result.report.selected_alpha])
        << "\n";
    return kExitOk;
}

int cmd_mc_table(const Globals& g, const TableOpts& o, std::ostream& out) {
    auto cfg = resolve_config(o.config, g);
    if (!o.horizons.empty()) cfg.horizons = o.horizons;
    if (o.replications) cfg.replications = *o.replications;
    if (o.eval_points) cfg.eval_points = *o.eval_points;
    if (o.cells_per_unit) cfg.cells_per_unit = *o.cells_per_unit;
    cfg.validate();

    const fs::path dir = g.output_dir;
    auto m = start_manifest("mc-table", cfg.seed);
    m.config = io::to_json(cfg);
    m.config["dry_run"] = o.dry_run;
    if (o.dry_run) {
        fs::create_directories(dir);
        finish(dir, m);
        out << "dry run: manifest written to " << (dir / "manifest.json").string() << "\n";
        return kExitOk;
    }
    RunOptions ro;
    ro.jobs = jobs_for(g);
    const auto table = run_monte_carlo(cfg, ro);
    emit(dir, "risk_table.csv", io::risk_table_csv(table), m);
    emit(dir, "risk_plot.csv", io::risk_plot_csv(table), m);
    finish(dir, m);
    out << "signal norm " << io::format_double(table.signal_norm) << "\n";
    for (const auto& r : table.rows) {
        out << "n=" << r.n << " R_bar=" << io::format_double(r.mean_risk) << " R_star=" << io::format_double(r.relative_risk)
            << " se=" << io::format_double(r.std_error) << "\n";
    }
    return kExitOk;
}

int cmd_renewal(const Globals& g, const RenewalOpts& o, std::ostream& out) {
    const auto law = io::parse_distribution(o.dist);
    if (!law.strictly_positive()) throw ConfigError("inter-arrival law '" + o.dist + "' must be supported on (0, inf)");
    if (!(o.beta > 0.0)) throw ConfigError("--beta must be positive");
    RenewalOptions ro;
    ro.steps_per_mean = o.steps_per_mean;
    ro.truncation_mult = o.truncation_mult;
    const auto profile = renewal_profile(law, ro);
    const auto h3 = check_exponential_moment(law, o.beta);

    const fs::path dir = g.output_dir;
    auto m = start_manifest("renewal", g.seed.value_or(0));
    m.config = {{"distribution", io::to_json(law)},
                {"beta", o.beta},
                {"steps_per_mean", o.steps_per_mean},
                {"truncation_mult", o.truncation_mult}};
    emit(dir, "renewal_profile.csv", io::renewal_profile_csv(profile), m);
    const auto summary = io::renewal_summary_json(profile, law, h3, o.beta);
    emit(dir, "renewal_summary.json", summary.dump(2) + "\n", m);
    finish(dir, m);
    out << "tau_bar=" << io::format_double(profile.tau_bar) << " upsilon_l1=" << io::format_double(profile.upsilon_l1)
        << " rho_sup=" << io::format_double(profile.rho_sup) << "\n";
    for (const auto& w : summary["warnings"]) out << "warning: " << w.get<std::string>() << "\n";
    return kExitOk;
}

int cmd_constants(const Globals& g, const ConstantsOpts& o, std::ostream& out) {
    auto cfg = resolve_config(o.config, g);
    const int n = o.n > 0 ? o.n : cfg.horizons.front();
    if (n < 2) throw ConfigError("--n must be >= 2");
    const auto profile = renewal_profile(cfg.noise.interarrival);
    const auto family = default_weight_family(n, cfg.estimator, cfg.noise.sigma_q());
    const auto c = oracle_constants(cfg.noise, profile, n, family);

    const fs::path dir = g.output_dir;
    auto m = start_manifest("constants", cfg.seed);
    m.config = io::to_json(cfg);
    m.config["constants"] = {{"n", n}};
    auto j = io::constants_json(c);
    j["n"] = n;
    emit(dir, "constants.json", j.dump(2) + "\n", m);
    finish(dir, m);
    out << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive estimation of a periodic signal observed under semi-Markov noise"};
    app.set_version_flag("--version", std::string(SMREG_VERSION));
    app.require_subcommand(1);

    Globals g;
    app.add_option("--seed", g.seed, "Base seed (overrides the config)");
    app.add_option("--jobs", g.jobs, "Worker threads for Monte Carlo (default: all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--output-dir", g.output_dir, "Directory for all artifacts");
    app.add_flag("--paper-scale", g.paper_scale, "Use N = 10000 replications and 100001 evaluation points");

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "Simulate observation paths to CSV");
    sim->fallthrough();
    sim->add_option("--config", so.config, "Experiment config (JSON)");
    sim->add_option("--n", so.n, "Horizon (default: first configured horizon)");
    sim->add_option("--paths", so.paths, "Number of independent paths");

    EstimateOpts eo;
    auto* est = app.add_subcommand("estimate", "Run the model selection procedure on a path CSV");
    est->fallthrough();
    est->add_option("--path", eo.path, "Path CSV")->required();
    est->add_option("--config", eo.config, "Config supplying estimator parameters and the overlay signal");
    est->add_option("--eps", eo.eps, "Grid step epsilon");
    est->add_option("--delta", eo.delta, "Penalty factor delta");
    est->add_option("--varsigma", eo.varsigma, "Fixed varsigma*");
    est->add_flag("--plug-in", eo.plug_in, "Use varsigma* = sigma_hat");
    est->add_option("--eval-points", eo.eval_points, "Reconstruction grid size");
    est->add_flag("--overlay", eo.overlay, "Add the true signal column to estimate.csv");

    TableOpts to;
    auto* tab = app.add_subcommand("mc-table", "Monte Carlo risk table");
    tab->fallthrough();
    tab->add_option("--config", to.config, "Experiment config (JSON)");
    tab->add_option("--horizons", to.horizons, "Horizons n")->delimiter(',');
    tab->add_option("--replications", to.replications, "Replications N per horizon");
    tab->add_option("--eval-points", to.eval_points, "Risk evaluation grid size");
    tab->add_option("--cells-per-unit", to.cells_per_unit, "Path grid cells per unit time");
    tab->add_flag("--dry-run", to.dry_run, "Write the manifest only");

    RenewalOpts ro;
    auto* ren = app.add_subcommand("renewal", "Solve the renewal equation for an inter-arrival law");
    ren->fallthrough();
    ren->add_option("--dist", ro.dist, "Law, e.g. chi2:3, exponential:1, gamma:2,2");
    ren->add_option("--beta", ro.beta, "Exponential-moment probe");
    ren->add_option("--steps-per-mean", ro.steps_per_mean, "Grid points per mean inter-arrival time");
    ren->add_option("--truncation-mult", ro.truncation_mult, "Truncation T in units of the mean");

    ConstantsOpts co;
    auto* con = app.add_subcommand("constants", "Oracle-inequality constants for a configuration");
    con->fallthrough();
    con->add_option("--config", co.config, "Experiment config (JSON)");
    con->add_option("--n", co.n, "Horizon (default: first configured horizon)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(g, so, out);
        if (*est) return cmd_estimate(g, eo, out, err);
        if (*tab) return cmd_mc_table(g, to, out);
        if (*ren) return cmd_renewal(g, ro, out);
        if (*con) return cmd_constants(g, co, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const RefusalError& e) {
        err << "refused: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace smreg::cli
