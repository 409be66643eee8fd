#include "smreg/io.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "smreg/errors.hpp"

namespace smreg::io {
namespace fs = std::filesystem;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string join(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing field '" + join(where, key) + "'");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError("field '" + path + "' must be a number");
    return v.get<double>();
}

long long as_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError("field '" + path + "' must be an integer");
    return v.get<long long>();
}

double number_field(const json& j, const std::string& key, const std::string& where) {
    return as_number(require(j, key, where), join(where, key));
}

std::optional<double> optional_number(const json& j, const std::string& key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return as_number(*it, join(where, key));
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError("field '" + path + "' must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

// Rethrows a factory's ConfigError with the field path prepended.
template <class F>
auto at_field(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError("field '" + path + "': " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError("field '" + path + "': " + e.what());
    }
}

DistributionSpec make_distribution(const std::string& name, const std::vector<double>& args,
                                   const std::string& where) {
    auto need = [&](std::size_t k) {
        if (args.size() != k) {
            throw ConfigError("distribution '" + name + "' takes " +
                              std::to_string(k) + " parameter(s)");
        }
    };
    auto build = [&] {
        if (name == "exponential" || name == "exp") {
            need(1);
            return DistributionSpec::exponential(args[0]);
        }
        if (name == "gamma") {
            need(2);
            return DistributionSpec::gamma(args[0], args[1]);
        }
        if (name == "erlang") {
            need(2);
            if (args[0] != std::floor(args[0]) || args[0] < 1) {
                throw ConfigError("erlang stages must be a positive integer");
            }
            return DistributionSpec::erlang(static_cast<int>(args[0]), args[1]);
        }
        if (name == "chi2" || name == "chi_squared") {
            need(1);
            return DistributionSpec::chi_squared(args[0]);
        }
        if (name == "weibull") {
            need(2);
            return DistributionSpec::weibull(args[0], args[1]);
        }
        if (name == "uniform") {
            need(2);
            return DistributionSpec::uniform(args[0], args[1]);
        }
        if (name == "normal") {
            need(2);
            return DistributionSpec::normal(args[0], args[1]);
        }
        if (name == "rademacher") {
            need(0);
            return DistributionSpec::rademacher();
        }
        if (name == "laplace") {
            need(1);
            return DistributionSpec::laplace(args[0]);
        }
        throw ConfigError("unknown distribution '" + name + "'");
    };
    return where.empty() ? build() : at_field(where, build);
}

// Parameter names per distribution, in factory argument order.
std::vector<std::string> parameter_names(const std::string& name) {
    if (name == "exponential" || name == "exp") return {"rate"};
    if (name == "gamma") return {"shape", "rate"};
    if (name == "erlang") return {"stages", "rate"};
    if (name == "chi2" || name == "chi_squared") return {"dof"};
    if (name == "weibull") return {"shape", "scale"};
    if (name == "uniform") return {"low", "high"};
    if (name == "normal") return {"mean", "sd"};
    if (name == "rademacher") return {};
    if (name == "laplace") return {"scale"};
    return {};
}

const char* signal_kind_name(SignalKind k) {
    switch (k) {
        case SignalKind::PaperTestSignal: return "PaperTestSignal";
        case SignalKind::CoefficientList: return "CoefficientList";
        case SignalKind::SampledGrid: return "SampledGrid";
    }
    return "?";
}

}  // namespace

// --- distributions ------------------------------------------------------------

json to_json(const DistributionSpec& d) {
    json j;
    switch (d.kind) {
        case DistKind::Exponential: j = {{"name", "exponential"}, {"rate", d.a}}; break;
        case DistKind::Gamma: j = {{"name", "gamma"}, {"shape", d.a}, {"rate", d.b}}; break;
        case DistKind::ChiSquared: j = {{"name", "chi2"}, {"dof", d.a}}; break;
        case DistKind::Weibull: j = {{"name", "weibull"}, {"shape", d.a}, {"scale", d.b}}; break;
        case DistKind::Uniform: j = {{"name", "uniform"}, {"low", d.a}, {"high", d.b}}; break;
        case DistKind::Normal: j = {{"name", "normal"}, {"mean", d.a}, {"sd", d.b}}; break;
        case DistKind::Rademacher: j = {{"name", "rademacher"}}; break;
        case DistKind::Laplace: j = {{"name", "laplace"}, {"scale", d.a}}; break;
    }
    return j;
}

DistributionSpec parse_distribution(std::string_view text) {
    const std::string s(text);
    const auto colon = s.find(':');
    const std::string name = s.substr(0, colon);
    std::vector<double> args;
    if (colon != std::string::npos) {
        std::string rest = s.substr(colon + 1);
        std::stringstream ss(rest);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            double v = 0.0;
            const auto* end = tok.data() + tok.size();
            auto [ptr, ec] = std::from_chars(tok.data(), end, v);
            if (ec != std::errc{} || ptr != end) {
                throw ConfigError("bad distribution parameter '" + tok + "' in '" + s + "'");
            }
            args.push_back(v);
        }
    }
    return make_distribution(name, args, "");
}

DistributionSpec distribution_from_json(const json& j, const std::string& where) {
    if (j.is_string()) return at_field(where, [&] { return parse_distribution(j.get<std::string>()); });
    const auto& name_v = require(j, "name", where);
    if (!name_v.is_string()) throw ConfigError("field '" + join(where, "name") + "' must be a string");
    const auto name = name_v.get<std::string>();
    std::vector<double> args;
    for (const auto& p : parameter_names(name)) args.push_back(number_field(j, p, where));
    return make_distribution(name, args, where);
}

// --- signal -------------------------------------------------------------------

json to_json(const SignalSpec& s) {
    json j{{"kind", signal_kind_name(s.kind())}};
    if (s.kind() == SignalKind::CoefficientList) j["coefficients"] = s.coefficients();
    if (s.kind() == SignalKind::SampledGrid) {
        j["samples"] = {{"grid", s.samples().grid}, {"values", s.samples().values}};
    }
    return j;
}

SignalSpec signal_from_json(const json& j, const std::string& where) {
    const auto& kind_v = require(j, "kind", where);
    if (!kind_v.is_string()) throw ConfigError("field '" + join(where, "kind") + "' must be a string");
    const auto kind = kind_v.get<std::string>();
    if (kind == "PaperTestSignal") return SignalSpec::paper_test_signal();
    if (kind == "CoefficientList") {
        auto c = number_list(require(j, "coefficients", where), join(where, "coefficients"));
        if (c.empty()) throw ConfigError("field '" + join(where, "coefficients") + "' must not be empty");
        return SignalSpec::from_coefficients(std::move(c));
    }
    if (kind == "SampledGrid") {
        const auto path = join(where, "samples");
        const auto& sj = require(j, "samples", where);
        SampledValues sv;
        sv.grid = number_list(require(sj, "grid", path), join(path, "grid"));
        sv.values = number_list(require(sj, "values", path), join(path, "values"));
        if (sv.grid.size() != sv.values.size()) {
            throw ConfigError("field '" + join(path, "values") + "' must match the grid length");
        }
        return at_field(where, [&] { return SignalSpec::from_samples(std::move(sv)); });
    }
    throw ConfigError("field '" + join(where, "kind") + "': unknown signal kind '" + kind + "'");
}

// --- noise --------------------------------------------------------------------

json to_json(const NoiseModel& m) {
    json j{{"rho1", m.rho1},
           {"rho2", m.rho2},
           {"rho_check", m.rho_check},
           {"interarrival", to_json(m.interarrival)},
           {"marks", to_json(m.marks)},
           {"beta", m.beta}};
    if (m.jumps) {
        j["jumps"] = {{"intensity", m.jumps->intensity}, {"size", to_json(m.jumps->size)}};
    } else {
        j["jumps"] = nullptr;
    }
    return j;
}

NoiseModel noise_from_json(const json& j, const std::string& where) {
    NoiseModel m;
    m.rho1 = number_field(j, "rho1", where);
    m.rho2 = number_field(j, "rho2", where);
    if (auto v = optional_number(j, "rho_check", where)) m.rho_check = *v;
    if (auto v = optional_number(j, "beta", where)) m.beta = *v;
    m.interarrival = distribution_from_json(require(j, "interarrival", where), join(where, "interarrival"));
    if (j.contains("marks")) m.marks = distribution_from_json(j["marks"], join(where, "marks"));
    if (j.contains("jumps") && !j["jumps"].is_null()) {
        const auto path = join(where, "jumps");
        JumpMeasureSpec js;
        js.intensity = number_field(j["jumps"], "intensity", path);
        if (j["jumps"].contains("size")) js.size = distribution_from_json(j["jumps"]["size"], join(path, "size"));
        m.jumps = js;
    }
    at_field(where, [&] {
        m.validate();
        return 0;
    });
    return m;
}

// --- estimator ----------------------------------------------------------------

json to_json(const EstimatorParams& p) {
    json j{{"k_star0", p.k_star0},
           {"eps", p.eps ? json(*p.eps) : json(nullptr)},
           {"m_rule", p.m_rule == MRule::LnSquared ? "ln_squared" : "inverse_eps_squared"},
           {"delta_rule", p.delta_rule == DeltaRule::Simulation ? "simulation" : "theory"},
           {"delta", p.delta ? json(*p.delta) : json(nullptr)},
           {"varsigma_mode", p.varsigma_plug_in ? "plug_in" : "fixed"},
           {"varsigma_star", p.varsigma_star},
           {"known_sigma", p.known_sigma ? json(*p.known_sigma) : json(nullptr)}};
    return j;
}

EstimatorParams estimator_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
    EstimatorParams p;
    if (j.contains("k_star0")) p.k_star0 = static_cast<int>(as_integer(j["k_star0"], join(where, "k_star0")));
    p.eps = optional_number(j, "eps", where);
    p.delta = optional_number(j, "delta", where);
    p.known_sigma = optional_number(j, "known_sigma", where);
    if (auto v = optional_number(j, "varsigma_star", where)) p.varsigma_star = *v;
    auto enum_field = [&](const char* key, std::initializer_list<const char*> allowed) -> std::string {
        const auto path = join(where, key);
        if (!j[key].is_string()) throw ConfigError("field '" + path + "' must be a string");
        auto s = j[key].get<std::string>();
        for (const char* a : allowed) {
            if (s == a) return s;
        }
        throw ConfigError("field '" + path + "': unknown value '" + s + "'");
    };
    if (j.contains("m_rule")) {
        p.m_rule = enum_field("m_rule", {"ln_squared", "inverse_eps_squared"}) == "ln_squared"
                       ? MRule::LnSquared
                       : MRule::InverseEpsSquared;
    }
    if (j.contains("delta_rule")) {
        p.delta_rule = enum_field("delta_rule", {"simulation", "theory"}) == "simulation" ? DeltaRule::Simulation
                                                                                         : DeltaRule::Theory;
    }
    if (j.contains("varsigma_mode")) {
        p.varsigma_plug_in = enum_field("varsigma_mode", {"fixed", "plug_in"}) == "plug_in";
    }
    if (p.eps && !(*p.eps > 0.0 && *p.eps < 1.0)) throw ConfigError("field '" + join(where, "eps") + "' must lie in (0, 1)");
    if (p.delta && !(*p.delta > 0.0)) throw ConfigError("field '" + join(where, "delta") + "' must be positive");
    if (!(p.varsigma_star > 0.0)) throw ConfigError("field '" + join(where, "varsigma_star") + "' must be positive");
    if (p.known_sigma && !(*p.known_sigma > 0.0)) {
        throw ConfigError("field '" + join(where, "known_sigma") + "' must be positive");
    }
    if (p.k_star0 < 0) throw ConfigError("field '" + join(where, "k_star0") + "' must be >= 0");
    return p;
}

// --- experiment -----------------------------------------------------------------

json to_json(const ExperimentConfig& c) {
    return json{{"signal", to_json(c.signal)},
                {"noise", to_json(c.noise)},
                {"horizons", c.horizons},
                {"cells_per_unit", c.cells_per_unit},
                {"replications", c.replications},
                {"eval_points", c.eval_points},
                {"seed", c.seed},
                {"estimator", to_json(c.estimator)}};
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ExperimentConfig c;
    c.signal = signal_from_json(require(j, "signal", ""), "signal");
    c.noise = noise_from_json(require(j, "noise", ""), "noise");
    if (j.contains("horizons")) {
        const auto& h = j["horizons"];
        if (!h.is_array() || h.empty()) throw ConfigError("field 'horizons' must be a non-empty array");
        c.horizons.clear();
        for (std::size_t i = 0; i < h.size(); ++i) {
            const auto path = "horizons[" + std::to_string(i) + "]";
            const auto v = as_integer(h[i], path);
            if (v < 2 || v > 1'000'000) throw ConfigError("field '" + path + "' must lie in [2, 1000000]");
            c.horizons.push_back(static_cast<int>(v));
        }
    }
    auto int_field = [&](const char* key, int& out, long long lo) {
        if (!j.contains(key)) return;
        const auto v = as_integer(j[key], key);
        if (v < lo || v > 100'000'000) throw ConfigError(std::string("field '") + key + "' is out of range");
        out = static_cast<int>(v);
    };
    int_field("cells_per_unit", c.cells_per_unit, 0);
    int_field("replications", c.replications, 1);
    int_field("eval_points", c.eval_points, 100);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("field 'seed' must be a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("estimator")) c.estimator = estimator_from_json(j["estimator"], "estimator");
    c.validate();
    return c;
}

json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": invalid JSON (" + e.what() + ")");
    }
}

ExperimentConfig load_config(const fs::path& file) {
    const auto j = parse_json_text(read_text(file), file.string());
    try {
        return config_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
}

// --- files ----------------------------------------------------------------------

std::string read_text(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + file.string() + "'");
    return ss.str();
}

void write_text_atomic(const fs::path& file, const std::string& content) {
    std::error_code ec;
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + file.parent_path().string() + "': " + ec.message());
    }
    auto tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write failed on '" + tmp.string() + "'");
    }
    fs::rename(tmp, file, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into '" + file.string() + "'");
    }
}

// --- paths ----------------------------------------------------------------------

std::string path_csv(const ObservationPath& path) {
    std::string out;
    out.reserve(static_cast<std::size_t>(path.p) * 64);
    out += "# seed=" + std::to_string(path.seed) + " n=" + std::to_string(path.n) +
           " p=" + std::to_string(path.p) + "\n";
    out += "t,y,dy,is_jump\n";
    const auto counts = path.jump_counts();
    const double h = path.step();
    double y = 0.0;
    for (std::int64_t i = 0; i < path.p; ++i) {
        const double dy = path.increments[static_cast<std::size_t>(i)];
        y += dy;
        out += format_double(static_cast<double>(i + 1) * h);
        out += ',';
        out += format_double(y);
        out += ',';
        out += format_double(dy);
        out += ',';
        out += std::to_string(counts[static_cast<std::size_t>(i)]);
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r' && ch != ' ') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& s, std::size_t line, const char* column) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError("path CSV line " + std::to_string(line) + ": bad value '" + s + "' in column " + column);
    }
    return v;
}

}  // namespace

ObservationPath parse_path_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    ObservationPath path;
    std::optional<std::int64_t> declared_p;
    std::vector<std::string> header;
    std::vector<double> t, y, dy;
    std::vector<int> jumps;
    int ti = -1, yi = -1, dyi = -1, ji = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string kv;
            while (meta >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const auto key = kv.substr(0, eq);
                const auto val = kv.substr(eq + 1);
                try {
                    if (key == "seed") path.seed = std::stoull(val);
                    if (key == "n") path.n = std::stoi(val);
                    if (key == "p") declared_p = std::stoll(val);
                } catch (const std::exception&) {
                    throw ConfigError("path CSV line " + std::to_string(lineno) + ": bad metadata '" + kv + "'");
                }
            }
            continue;
        }
        if (header.empty()) {
            header = split_csv_line(line);
            for (std::size_t k = 0; k < header.size(); ++k) {
                const int kk = static_cast<int>(k);
                if (header[k] == "t") ti = kk;
                else if (header[k] == "y") yi = kk;
                else if (header[k] == "dy") dyi = kk;
                else if (header[k] == "is_jump") ji = kk;
            }
            if (ti < 0 || yi < 0) throw ConfigError("path CSV header must contain columns 't' and 'y'");
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ConfigError("path CSV line " + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " columns, found " + std::to_string(cells.size()));
        }
        t.push_back(parse_cell(cells[static_cast<std::size_t>(ti)], lineno, "t"));
        y.push_back(parse_cell(cells[static_cast<std::size_t>(yi)], lineno, "y"));
        if (dyi >= 0) dy.push_back(parse_cell(cells[static_cast<std::size_t>(dyi)], lineno, "dy"));
        if (ji >= 0) jumps.push_back(static_cast<int>(parse_cell(cells[static_cast<std::size_t>(ji)], lineno, "is_jump")));
    }
    if (header.empty() || t.empty()) throw ConfigError("path CSV is empty");
    const auto p = static_cast<std::int64_t>(t.size());
    if (declared_p && *declared_p != p) {
        throw ConfigError("path CSV declares p=" + std::to_string(*declared_p) + " but has " + std::to_string(p) + " rows");
    }
    const double horizon = t.back();
    const int n = static_cast<int>(std::lround(horizon));
    if (n < 1 || std::abs(horizon - n) > 1e-9 * n) throw ConfigError("path CSV: last time point must be an integer horizon");
    if (path.n != 0 && path.n != n) throw ConfigError("path CSV: metadata n disagrees with the time column");
    const double h = static_cast<double>(n) / static_cast<double>(p);
    for (std::int64_t i = 0; i < p; ++i) {
        const double expect = static_cast<double>(i + 1) * h;
        if (std::abs(t[static_cast<std::size_t>(i)] - expect) > 1e-9 * std::max(1.0, expect)) {
            throw ConfigError("path CSV: time column is not the uniform grid i*h at row " + std::to_string(i + 1));
        }
    }
    path.n = n;
    path.p = p;
    if (!dy.empty()) {
        path.increments = std::move(dy);
    } else {
        path.increments.resize(static_cast<std::size_t>(p));
        double prev = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            path.increments[i] = y[i] - prev;
            prev = y[i];
        }
    }
    // Epoch times are not stored; place each counted epoch at its cell's right end.
    for (std::size_t i = 0; i < jumps.size(); ++i) {
        for (int k = 0; k < jumps[i]; ++k) path.jump_times.push_back(t[i]);
    }
    return path;
}

// --- estimation -------------------------------------------------------------------

json report_json(const SelectionReport& r, const WeightFamily& f) {
    const auto& a = f.alphas[r.selected_alpha];
    json fam{{"size", f.size()},
             {"k_star", f.k_star},
             {"m", f.m},
             {"epsilon", f.epsilon},
             {"varsigma_star", f.varsigma_star},
             {"upsilon_n", f.upsilon_n},
             {"j_star", f.j_star}};
    return json{{"n", r.n},
                {"sigma_hat", r.sigma_hat},
                {"delta", r.delta},
                {"delta_in_theory_range", delta_in_theory_range(r.delta)},
                {"selected",
                 {{"index", r.selected_alpha},
                  {"beta", a.beta},
                  {"l", a.l},
                  {"omega", f.omegas[r.selected_alpha]},
                  {"cost", r.costs[r.selected_alpha]},
                  {"penalty", r.penalties[r.selected_alpha]}}},
                {"family", fam},
                {"theta_hat", r.theta_hat},
                {"estimate_coefficients", r.estimate_coeffs}};
}

std::string cost_csv(const SelectionReport& r, const WeightFamily& f) {
    std::string out = "beta,l,omega,J_n,P_n\n";
    for (std::size_t a = 0; a < f.size(); ++a) {
        out += std::to_string(f.alphas[a].beta) + "," + format_double(f.alphas[a].l) + "," +
               format_double(f.omegas[a]) + "," + format_double(r.costs[a]) + "," + format_double(r.penalties[a]) + "\n";
    }
    return out;
}

std::string estimate_csv(std::span<const double> t, std::span<const double> s_hat, std::span<const double> s_true) {
    if (t.size() != s_hat.size() || (!s_true.empty() && s_true.size() != t.size())) {
        throw DomainError("estimate_csv: column lengths differ");
    }
    std::string out = s_true.empty() ? "t,S_hat\n" : "t,S_hat,S\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += format_double(t[i]) + "," + format_double(s_hat[i]);
        if (!s_true.empty()) out += "," + format_double(s_true[i]);
        out += "\n";
    }
    return out;
}

// --- tables ---------------------------------------------------------------------

std::string risk_table_csv(const RiskTable& table) {
    std::string out = "n,R_bar,R_star,se,wall_seconds,replications\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.n) + "," + format_double(r.mean_risk) + "," + format_double(r.relative_risk) + "," +
               format_double(r.std_error) + "," + format_double(r.wall_seconds) + "," +
               std::to_string(r.replications) + "\n";
    }
    return out;
}

std::string risk_plot_csv(const RiskTable& table) {
    std::string out = "n,R_bar,log_n,log_R\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.n) + "," + format_double(r.mean_risk) + "," + format_double(std::log(r.n)) + "," +
               format_double(std::log(r.mean_risk)) + "\n";
    }
    return out;
}

std::string renewal_profile_csv(const RenewalProfile& profile) {
    std::string out = "x,rho,upsilon\n";
    for (std::size_t i = 0; i < profile.rho.size(); ++i) {
        out += format_double(profile.x(i)) + "," + format_double(profile.rho[i]) + "," +
               format_double(profile.upsilon(i)) + "\n";
    }
    return out;
}

json renewal_summary_json(const RenewalProfile& profile, const DistributionSpec& law,
                          const ExponentialMomentCheck& h3, double beta) {
    json j{{"distribution", to_json(law)},
           {"tau_bar", profile.tau_bar},
           {"upsilon_l1", profile.upsilon_l1},
           {"rho_sup", profile.rho_sup},
           {"truncation_T", profile.truncation_T},
           {"step", profile.step},
           {"tail_bound", profile.tail_bound},
           {"tolerance", profile.tolerance},
           {"converged", profile.converged},
           {"h3_beta", beta},
           {"h3_exp_moment", h3.finite ? json(h3.value) : json(nullptr)},
           {"h3_satisfied", h3.finite}};
    json warnings = json::array();
    if (!h3.finite) {
        warnings.push_back("E exp(beta tau) diverges at beta = " + format_double(beta) +
                           "; the exponential-moment condition fails");
    }
    if (!profile.converged) warnings.push_back("renewal density did not settle within the tolerance by T");
    j["warnings"] = warnings;
    return j;
}

json constants_json(const OracleConstants& c) {
    return json{{"kappa_q", c.kappa_q},     {"sigma_q", c.sigma_q},   {"psi_q", c.psi_q},
                {"c_star_q", c.c_star_q},   {"c1", c.c1},             {"c2", c.c2},
                {"l_check", c.l_check},     {"phi_max", c.phi_max},   {"tau_bar", c.tau_bar},
                {"upsilon_l1", c.upsilon_l1}, {"rho_sup", c.rho_sup}, {"mark_m4", c.mark_m4},
                {"jump_m4", c.jump_m4},     {"iota", c.iota},         {"lambda_norm_max", c.lambda_norm_max},
                {"kappa_bound", (1.0 + c.tau_bar * c.rho_sup) * c.sigma_q}};
}

// --- manifests ------------------------------------------------------------------

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"tool_version", m.tool_version},
                {"seed", m.seed},
                {"started", m.started},
                {"finished", m.finished},
                {"config", m.config},
                {"outputs", m.outputs}};
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
    for (const auto& f : m.outputs) {
        if (!fs::exists(dir / f)) throw IoError("manifest lists missing output '" + (dir / f).string() + "'");
    }
    write_text_atomic(dir / "manifest.json", manifest_json(m).dump(2) + "\n");
}

}  // namespace smreg::io
