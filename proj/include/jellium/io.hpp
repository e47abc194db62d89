#pragma once

#include <jellium/equilibrium.hpp>
#include <jellium/exact_radii.hpp>
#include <jellium/mcmc.hpp>
#include <jellium/model.hpp>
#include <jellium/stats.hpp>

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace jellium {

using Json = nlohmann::ordered_json;

/// Version string baked in at build time (git describe).
const char* library_version();

/// Shortest-safe text for a double: 17 significant digits, '.' decimal point.
std::string format_real(double x);

Json to_json(const GasParams& params);
/// Reads keys n, beta, alpha, R. Throws InvalidParams.
GasParams params_from_json(const Json& j);

Json to_json(const EcdfReport& report);
Json to_json(const ChainDiagnostics& diag);
Json to_json(const Schedule& schedule);
Json profile_diagnostics(const EquilibriumProfile& profile);

/// Writes text atomically enough for our purposes; throws Error(Io) on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// `trial_id,max_modulus`, one row per trial.
std::string trial_batch_csv(const TrialBatch& batch);
/// params, base_seed, trials and version.
Json trial_batch_sidecar(const TrialBatch& batch);
/// Writes <stem>.csv and <stem>.json.
void write_trial_batch(const std::filesystem::path& stem, const TrialBatch& batch);
TrialBatch read_trial_batch(const std::filesystem::path& stem);

/// `trial_id,particle_id,modulus`.
std::string radial_samples_csv(const std::vector<RadialSample>& samples);
/// `trial_id,particle_id,x,y`, trial ids as carried by the chain samples.
std::string configs_csv(const std::vector<ChainResult>& chains);
/// `r,phi`.
std::string profile_csv(const EquilibriumProfile& profile);
/// `t,cdf`.
std::string law_csv(const std::vector<double>& t, const std::vector<double>& cdf);

/// `start:stop:step`; inclusive of stop when (stop - start)/step is integral within 1e-9.
/// Throws InvalidParams.
std::vector<double> parse_grid(const std::string& spec);

/// Flat TOML-style file: `[section]` headers, `key = value` lines, `#` comments,
/// optional double quotes around values. Keys come back as "section.key" (or just
/// "key" before any header), in file order. Throws InvalidParams with the line number.
std::vector<std::pair<std::string, std::string>> parse_flat_config(const std::string& text);

/// Parses a whole CSV with a header into named numeric columns. Throws Io.
std::map<std::string, std::vector<double>> read_csv_columns(const std::filesystem::path& path);

}  // namespace jellium
