#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/env.hpp"

namespace rwre {

// Validation failure; `field` is a JSON path such as "params.replicas".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    std::string experiment;
    std::optional<EnvDistribution> dist;
    std::vector<std::uint64_t> seeds;
    // Every parameter with defaults filled in, thresholds included.
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json thresholds = nlohmann::json::object();

    // The config as it will be reported and hashed.
    nlohmann::json resolved() const;
    std::string hash() const;
};

// Parses and validates, including the experiment's preconditions on the law.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunReport {
    std::string configHash;
    nlohmann::json config;
    nlohmann::json perSeed = nlohmann::json::array();
    nlohmann::json aggregate = nlohmann::json::object();
    bool pass = false;
    // Non-deterministic fields, kept apart from the result payload.
    std::string startedAt;
    nlohmann::json durations = nlohmann::json::object();

    // Everything except startedAt and durations.
    nlohmann::json payload() const;
    nlohmann::json to_json() const;
};

// Runs every seed (failures are recorded per seed) and, when outDir is set,
// writes report.json plus any raw CSV files into it.
RunReport run_experiment(const ExperimentConfig& cfg, unsigned threads,
                         const std::optional<std::filesystem::path>& outDir = std::nullopt);

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::string oracle;
    std::string lawRequirement;
    std::vector<std::string> requiredParameters;
};

const std::vector<CatalogEntry>& experiment_catalog();
nlohmann::json catalog_json();
std::string catalog_table();

std::string fnv1a_hex(const std::string& bytes);

}  // namespace rwre
