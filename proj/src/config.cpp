#include "metats/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "metats/errors.hpp"

namespace metats {

namespace {

using nlohmann::json;

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "family", "K",      "d",     "m",      "n",         "runs",
        "sigma",  "sigma_0", "sigma_q", "agents", "forced_last_k", "linear_update",
        "categorical_weights", "categorical_priors", "seed", "delta", "cert_runs",
    };
    return keys;
}

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what, key);
}

std::size_t read_count(const json& obj, const std::string& key, std::size_t fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        invalid(key, "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
}

double read_real(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        invalid(key, "expected a number");
    }
    return v.get<double>();
}

bool read_bool(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        invalid(key, "expected true or false");
    }
    return v.get<bool>();
}

std::string read_string(const json& obj, const std::string& key, const std::string& fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        invalid(key, "expected a string");
    }
    return v.get<std::string>();
}

json categorical_priors_json(const CategoricalMetaPrior& table) {
    json priors = json::array();
    for (const auto& prior : table.priors) {
        json arms = json::array();
        for (std::size_t i = 0; i < prior.arms(); ++i) {
            arms.push_back({prior.alpha[i], prior.beta[i]});
        }
        priors.push_back(std::move(arms));
    }
    return priors;
}

std::vector<BetaProductPrior> read_categorical_priors(const json& v) {
    const std::string key = "categorical_priors";
    if (!v.is_array() || v.empty()) {
        invalid(key, "expected a nonempty array of priors");
    }
    std::vector<BetaProductPrior> priors;
    for (const json& prior : v) {
        if (!prior.is_array() || prior.empty()) {
            invalid(key, "each prior must be a nonempty array of [alpha, beta] pairs");
        }
        BetaProductPrior p;
        for (const json& pair : prior) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                invalid(key, "each arm must be an [alpha, beta] pair of numbers");
            }
            p.alpha.push_back(pair[0].get<double>());
            p.beta.push_back(pair[1].get<double>());
        }
        priors.push_back(std::move(p));
    }
    return priors;
}

}  // namespace

AgentEntry agent_entry_from_label(const std::string& label) {
    if (label == "MetaTS") return {label, AgentKind::kMetaTS, 1.0};
    if (label == "MetaTSx3") return {label, AgentKind::kMetaTS, 3.0};
    if (label == "MetaTS/3") return {label, AgentKind::kMetaTS, 1.0 / 3.0};
    if (label == "OracleTS") return {label, AgentKind::kOracleTS, 1.0};
    if (label == "TS") return {label, AgentKind::kAgnosticTS, 1.0};
    throw ConfigError("config key 'agents': unknown agent '" + label +
                          "' (expected OracleTS, MetaTS, TS, MetaTSx3 or MetaTS/3)",
                      "agents");
}

CategoricalMetaPrior default_categorical_table() {
    return CategoricalMetaPrior{
        {0.5, 0.5},
        {BetaProductPrior{{6.0, 2.0}, {2.0, 6.0}}, BetaProductPrior{{2.0, 6.0}, {6.0, 2.0}}},
    };
}

ExperimentConfig default_config() {
    ExperimentConfig config;
    config.categorical = default_categorical_table();
    config.agents = {agent_entry_from_label("OracleTS"), agent_entry_from_label("MetaTS"),
                     agent_entry_from_label("TS")};
    return config;
}

void ExperimentConfig::validate() const {
    if (tasks < 1) invalid("m", "must be at least 1");
    if (horizon < 1) invalid("n", "must be at least 1");
    if (runs < 1) invalid("runs", "must be at least 1");
    if (arms < 2) invalid("K", "must be at least 2");
    if (dim < 1) invalid("d", "must be at least 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) invalid("sigma", "must be positive");
    if (!(sigma_0 > 0.0) || !std::isfinite(sigma_0)) invalid("sigma_0", "must be positive");
    if (!(sigma_q > 0.0) || !std::isfinite(sigma_q)) invalid("sigma_q", "must be positive");
    if (!(delta > 0.0 && delta < 1.0)) invalid("delta", "must lie in (0, 1)");
    if (certification_runs < 1) invalid("cert_runs", "must be at least 1");
    if (agents.empty()) invalid("agents", "at least one agent is required");
    std::set<std::string> labels;
    for (const auto& agent : agents) {
        if (!labels.insert(agent.label).second) {
            invalid("agents", "duplicate agent '" + agent.label + "'");
        }
    }
    if (family == Family::kBernoulli) {
        try {
            metats::validate(MetaPrior{categorical});
        } catch (const DomainError& e) {
            invalid("categorical_priors", e.what());
        }
        if (categorical.priors.front().arms() != arms) {
            invalid("categorical_priors", "arm count of the priors must equal K");
        }
    }
}

std::vector<std::pair<std::string, std::string>> config_key_defaults() {
    const json defaults = to_json(default_config());
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& key : known_keys()) {
        std::string text = defaults.at(key).dump();
        if (key == "K") {
            text += " (5 d for the linear family)";
        }
        out.emplace_back(key, text);
    }
    return out;
}

json to_json(const ExperimentConfig& config) {
    json agents = json::array();
    for (const auto& agent : config.agents) {
        agents.push_back(agent.label);
    }
    return json{
        {"family", std::string(to_string(config.family))},
        {"K", config.arms},
        {"d", config.dim},
        {"m", config.tasks},
        {"n", config.horizon},
        {"runs", config.runs},
        {"sigma", config.sigma},
        {"sigma_0", config.sigma_0},
        {"sigma_q", config.sigma_q},
        {"agents", agents},
        {"forced_last_k", config.forced_last_k},
        {"linear_update", std::string(to_string(config.linear_update))},
        {"categorical_weights", config.categorical.weights},
        {"categorical_priors", categorical_priors_json(config.categorical)},
        {"seed", config.master_seed},
        {"delta", config.delta},
        {"cert_runs", config.certification_runs},
    };
}

ExperimentConfig config_from_json(const json& obj) {
    if (!obj.is_object()) {
        throw ConfigError("configuration must be a JSON object", {}, ConfigError::Kind::kMalformed);
    }
    const auto& keys = known_keys();
    for (const auto& item : obj.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
            invalid(item.key(), "unknown configuration key");
        }
    }

    ExperimentConfig config = default_config();
    try {
        config.family = family_from_string(read_string(obj, "family", "gaussian"));
    } catch (const DomainError& e) {
        invalid("family", e.what());
    }
    config.dim = read_count(obj, "d", config.dim);
    const std::size_t default_arms = config.family == Family::kLinear ? 5 * config.dim : config.arms;
    config.arms = read_count(obj, "K", default_arms);
    config.tasks = read_count(obj, "m", config.tasks);
    config.horizon = read_count(obj, "n", config.horizon);
    config.runs = read_count(obj, "runs", config.runs);
    config.sigma = read_real(obj, "sigma", config.sigma);
    config.sigma_0 = read_real(obj, "sigma_0", config.sigma_0);
    config.sigma_q = read_real(obj, "sigma_q", config.sigma_q);
    config.forced_last_k = read_bool(obj, "forced_last_k", config.forced_last_k);
    try {
        config.linear_update =
            linear_update_from_string(read_string(obj, "linear_update", "woodbury"));
    } catch (const DomainError& e) {
        invalid("linear_update", e.what());
    }
    if (obj.contains("seed")) {
        const json& v = obj.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            invalid("seed", "expected a nonnegative integer");
        }
        config.master_seed = v.get<std::uint64_t>();
    }
    config.delta = read_real(obj, "delta", config.delta);
    config.certification_runs = read_count(obj, "cert_runs", config.certification_runs);

    if (obj.contains("agents")) {
        const json& v = obj.at("agents");
        if (!v.is_array()) {
            invalid("agents", "expected an array of agent labels");
        }
        config.agents.clear();
        for (const json& label : v) {
            if (!label.is_string()) {
                invalid("agents", "agent labels must be strings");
            }
            config.agents.push_back(agent_entry_from_label(label.get<std::string>()));
        }
    }
    if (obj.contains("categorical_priors")) {
        config.categorical.priors = read_categorical_priors(obj.at("categorical_priors"));
    }
    if (obj.contains("categorical_weights")) {
        const json& v = obj.at("categorical_weights");
        if (!v.is_array()) {
            invalid("categorical_weights", "expected an array of numbers");
        }
        config.categorical.weights.clear();
        for (const json& w : v) {
            if (!w.is_number()) {
                invalid("categorical_weights", "expected an array of numbers");
            }
            config.categorical.weights.push_back(w.get<double>());
        }
    }
    if (config.family == Family::kBernoulli &&
        config.categorical.weights.size() != config.categorical.priors.size()) {
        invalid("categorical_weights", "need one weight per categorical prior");
    }
    config.validate();
    return config;
}

void apply_overrides(json& obj, const std::vector<std::string>& overrides) {
    for (const auto& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("override '" + entry + "' is not of the form key=value", entry);
        }
        const std::string key = entry.substr(0, eq);
        const std::string text = entry.substr(eq + 1);
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            invalid(key, "unknown configuration key");
        }
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) {
            value = text;
        }
        obj[key] = std::move(value);
    }
}

nlohmann::json load_config_json(const std::filesystem::path& path) {
    if (path.empty()) {
        return json::object();
    }
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'", {},
                          ConfigError::Kind::kMissingFile);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    json obj = json::parse(buffer.str(), nullptr, false);
    if (obj.is_discarded()) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON", {},
                          ConfigError::Kind::kMalformed);
    }
    return obj;
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides) {
    json obj = load_config_json(path);
    apply_overrides(obj, overrides);
    return config_from_json(obj);
}

}  // namespace metats
