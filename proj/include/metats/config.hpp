#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "metats/agent.hpp"
#include "metats/environment.hpp"
#include "metats/meta_posterior.hpp"

namespace metats {

/// One agent column of an experiment. Labels OracleTS, MetaTS, TS, MetaTSx3
/// and MetaTS/3 are recognized.
struct AgentEntry {
    std::string label;
    AgentKind kind = AgentKind::kMetaTS;
    double misspecification_scale = 1.0;

    friend bool operator==(const AgentEntry&, const AgentEntry&) = default;
};

AgentEntry agent_entry_from_label(const std::string& label);

struct ExperimentConfig {
    Family family = Family::kGaussian;
    std::size_t arms = 2;        // K
    std::size_t dim = 2;         // d, linear family
    std::size_t tasks = 20;      // m
    std::size_t horizon = 200;   // n
    std::size_t runs = 100;      // R
    double sigma = 1.0;
    double sigma_0 = 0.1;
    double sigma_q = 0.5;
    CategoricalMetaPrior categorical;
    std::vector<AgentEntry> agents;
    bool forced_last_k = false;
    LinearUpdate linear_update = LinearUpdate::kWoodbury;
    std::uint64_t master_seed = 2021;
    double delta = 0.05;
    std::size_t certification_runs = 1000;

    /// Throws ConfigError naming the first offending key.
    void validate() const;
};

/// Beta(6,2) x Beta(2,6) and its mirror with weights (0.5, 0.5).
CategoricalMetaPrior default_categorical_table();

/// The Gaussian experiment with K = 2, m = 20, n = 200, R = 100, sigma = 1,
/// sigma_0 = 0.1, sigma_q = 0.5 and agents OracleTS, MetaTS, TS.
ExperimentConfig default_config();

/// Every recognized key with its default rendered as JSON text, in a fixed
/// order.
std::vector<std::pair<std::string, std::string>> config_key_defaults();

nlohmann::json to_json(const ExperimentConfig& config);

/// Builds a validated config from a JSON object. Missing keys take their
/// defaults; unknown keys are rejected. When K is absent and the family is
/// linear, K defaults to 5 d.
ExperimentConfig config_from_json(const nlohmann::json& object);

/// Applies "key=value" overrides to a JSON object. Values are parsed as JSON
/// when possible and taken as strings otherwise.
void apply_overrides(nlohmann::json& object, const std::vector<std::string>& overrides);

/// Reads a JSON object from `path`; an empty path gives "{}". Throws
/// ConfigError of kind kMissingFile or kMalformed.
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Reads `path` (an empty path means "{}"), applies overrides and validates.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {});

}  // namespace metats
