#pragma once

// JSON configs, CSV artifacts and run manifests. Floats are written with 17
// significant digits so every artifact round-trips exactly.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "smreg/distributions.hpp"
#include "smreg/estimator.hpp"
#include "smreg/noise.hpp"
#include "smreg/renewal.hpp"
#include "smreg/risk.hpp"
#include "smreg/signal.hpp"

namespace smreg::io {

using json = nlohmann::ordered_json;

std::string format_double(double x);

// --- configuration ----------------------------------------------------------
// All *_from_json functions throw ConfigError naming the offending field by its
// dotted path (e.g. "noise.rho1").

json to_json(const DistributionSpec& d);
DistributionSpec distribution_from_json(const json& j, const std::string& where);
// Compact form "name:arg[,arg]", e.g. "chi2:3", "gamma:2,1", "exponential:1".
DistributionSpec parse_distribution(std::string_view text);

json to_json(const SignalSpec& s);
SignalSpec signal_from_json(const json& j, const std::string& where);

json to_json(const NoiseModel& m);
NoiseModel noise_from_json(const json& j, const std::string& where);

json to_json(const EstimatorParams& p);
EstimatorParams estimator_from_json(const json& j, const std::string& where);

json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);

// Parse errors carry the line and column of the JSON text.
json parse_json_text(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& file);

// --- files ------------------------------------------------------------------

std::string read_text(const std::filesystem::path& file);
// Writes to a sibling temporary and renames it into place. Throws IoError.
void write_text_atomic(const std::filesystem::path& file, const std::string& content);

// --- observation paths --------------------------------------------------------
// "# seed=<s> n=<n> p=<p>" then header "t,y,dy,is_jump" and p rows for
// t = i h, i = 1..p. y is the cumulative observation, dy the cell increment and
// is_jump counts semi-Markov epochs inside the cell.

std::string path_csv(const ObservationPath& path);
// Throws ConfigError on schema mismatch or an empty file.
ObservationPath parse_path_csv(const std::string& text);

// --- estimation ---------------------------------------------------------------

json report_json(const SelectionReport& report, const WeightFamily& family);
// beta,l,omega,J_n,P_n per alpha.
std::string cost_csv(const SelectionReport& report, const WeightFamily& family);
// t,S_hat[,S]
std::string estimate_csv(std::span<const double> t, std::span<const double> s_hat,
                         std::span<const double> s_true = {});

// --- tables -------------------------------------------------------------------

// n,R_bar,R_star,se,wall_seconds,replications
std::string risk_table_csv(const RiskTable& table);
// n,R_bar,log_n,log_R
std::string risk_plot_csv(const RiskTable& table);

// x,rho,upsilon
std::string renewal_profile_csv(const RenewalProfile& profile);
json renewal_summary_json(const RenewalProfile& profile, const DistributionSpec& law,
                          const ExponentialMomentCheck& h3, double beta);

json constants_json(const OracleConstants& c);

// --- manifests ------------------------------------------------------------------

struct RunManifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;  // file names relative to the manifest
};

std::string timestamp_utc();
json manifest_json(const RunManifest& m);
// Writes manifest.json into dir, after checking every listed output exists.
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace smreg::io
