#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace safectl {

struct SweepSpec {
    std::string param;
    std::vector<double> values;

    bool operator==(const SweepSpec&) const = default;
};

/// Parsed CLI configuration. Sectioned key-value text:
///   [scenario]  name, controller, plus scenario parameter overrides
///   [run]       ctrl_dt, duration, sim_substeps, seed, x0 (comma list), out
///   [sweep]     param, values (comma list)
/// Unset run fields fall back to the scenario defaults.
struct CliConfig {
    std::string scenario;
    std::string controller = "safety_filter";
    std::map<std::string, double> scenario_params;

    std::optional<double> ctrl_dt;
    std::optional<double> duration;
    std::optional<int> sim_substeps;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<double>> x0;
    std::string out_dir = ".";

    std::optional<SweepSpec> sweep;

    bool operator==(const CliConfig&) const = default;
};

/// Throws ParseError with the offending line number on malformed syntax or an
/// unknown key (suggesting the nearest valid key).
CliConfig parse_config(const std::string& text);

/// Inverse of parse_config: parse_config(serialize_config(c)) == c.
std::string serialize_config(const CliConfig& cfg);

/// Registry-level validation: scenario and controller names must be
/// registered, scenario parameter keys must exist for that scenario, sweep
/// values must be finite. Throws UnknownScenario or ParseError.
void validate_config(const CliConfig& cfg);

int edit_distance(const std::string& a, const std::string& b);
/// Closest candidate by edit distance; empty when candidates is empty.
std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates);

}  // namespace safectl
