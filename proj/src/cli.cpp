#include "metats/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metats/bounds.hpp"
#include "metats/config.hpp"
#include "metats/errors.hpp"
#include "metats/harness.hpp"
#include "metats/oracles.hpp"

#ifndef METATS_PRESET_DIR
#define METATS_PRESET_DIR "presets"
#endif

namespace metats {

using nlohmann::json;

namespace {

struct Invocation {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string output_dir;
    std::string format = "csv";
    std::size_t threads = 0;
    bool skip_certification = false;
};

std::string key_table() {
    std::ostringstream text;
    text << "Configuration keys (set in the JSON config or as key=value overrides):\n";
    for (const auto& [key, value] : config_key_defaults()) {
        text << "  " << key << " = " << value << '\n';
    }
    text << "Seed precedence: --seed, then the config seed, then $METATS_SEED.\n"
         << "Exit codes: 0 ok, 1 invalid config, 2 runtime error, 3 selftest failure,\n"
         << "            4 missing config file, 5 malformed config file.";
    return text.str();
}

void add_config_options(CLI::App& sub, Invocation& inv) {
    sub.add_option("--config", inv.config_path, "JSON config file");
    sub.add_option("--preset", inv.preset, "Named preset from the presets directory");
    sub.add_option("--seed", inv.seed, "Master seed");
    sub.add_option("--threads", inv.threads, "Worker threads (0 = all cores)");
    sub.add_option("overrides", inv.overrides, "key=value configuration overrides");
    sub.footer(key_table());
}

json resolve_config_json(const Invocation& inv) {
    if (!inv.config_path.empty() && !inv.preset.empty()) {
        throw ConfigError("--config and --preset are mutually exclusive");
    }
    std::filesystem::path path = inv.config_path;
    if (!inv.preset.empty()) {
        path = preset_directory() / (inv.preset + ".json");
    }
    json obj = load_config_json(path);
    if (!obj.is_object()) {
        throw ConfigError("configuration must be a JSON object", {}, ConfigError::Kind::kMalformed);
    }
    apply_overrides(obj, inv.overrides);
    if (inv.seed) {
        obj["seed"] = *inv.seed;
    } else if (!obj.contains("seed")) {
        if (const char* env = std::getenv("METATS_SEED"); env != nullptr && *env != '\0') {
            try {
                std::size_t used = 0;
                const std::uint64_t value = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
                obj["seed"] = value;
            } catch (const std::logic_error&) {
                throw ConfigError("METATS_SEED must be a nonnegative integer", "seed");
            }
        }
    }
    return obj;
}

int do_run(const Invocation& inv, std::ostream& out, std::ostream& err) {
    const ExperimentConfig config = config_from_json(resolve_config_json(inv));
    ReportFormat format;
    try {
        format = report_format_from_string(inv.format);
    } catch (const DomainError& e) {
        throw ConfigError(e.what(), "format");
    }
    const std::filesystem::path dir = inv.output_dir.empty() ? "results" : inv.output_dir;

    std::size_t last_tenth = 0;
    const RegretReport report =
        run_experiment(config, inv.threads, [&](std::size_t done, std::size_t total) {
            const std::size_t tenth = done * 10 / total;
            if (tenth > last_tenth || done == total) {
                last_tenth = tenth;
                err << "metats: " << done << "/" << total << " runs\n" << std::flush;
            }
        });
    const auto files = emit_report(report, dir, format);

    json summary;
    for (const auto& label : report.agents) {
        summary["final_regret"][label] = {{"mean", report.final_mean(label)},
                                          {"stderr", report.final_standard_error(label)}};
    }
    for (const auto& [label, series] : report.true_prior_weight) {
        double total = 0.0;
        for (const auto& run : series) total += run.back();
        summary["final_true_prior_weight"][label] = total / static_cast<double>(series.size());
    }
    json written = json::array();
    for (const auto& f : files) written.push_back(f.string());
    summary["files"] = written;
    out << summary.dump(2) << '\n';
    return kExitOk;
}

int do_check_bounds(const Invocation& inv, std::ostream& out) {
    const ExperimentConfig config = config_from_json(resolve_config_json(inv));
    const json report = bound_report(config, !inv.skip_certification, inv.threads);
    if (!inv.output_dir.empty()) {
        std::filesystem::create_directories(inv.output_dir);
        std::ofstream file(std::filesystem::path(inv.output_dir) / "bounds.json");
        file << report.dump(2) << '\n';
        if (!file) {
            throw std::runtime_error("cannot write bounds.json in '" + inv.output_dir + "'");
        }
    }
    out << report.dump(2) << '\n';

    bool holds = true;
    if (report["empirical"].is_object()) {
        for (const auto& item : report["empirical"].items()) {
            const auto& entry = item.value();
            if (entry.contains("holds")) holds = holds && entry["holds"].get<bool>();
            if (entry.contains("passed")) holds = holds && entry["passed"].get<bool>();
        }
    }
    return holds ? kExitOk : kExitSelftest;
}

int do_selftest(const Invocation& inv, std::ostream& out) {
    const std::uint64_t seed = inv.seed.value_or(2021);
    bool all = true;
    for (const auto& c : oracle::run_selftest(seed)) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << "  worst=" << c.worst
            << " tol=" << c.tolerance;
        if (!c.detail.empty()) out << "  (" << c.detail << ")";
        out << '\n';
        all = all && c.passed;
    }
    return all ? kExitOk : kExitSelftest;
}

}  // namespace

std::filesystem::path preset_directory() {
    if (const char* env = std::getenv("METATS_PRESET_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return METATS_PRESET_DIR;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Meta-Thompson sampling simulations and regret-bound evaluators", "metats"};
    app.require_subcommand(1);
    app.footer(key_table());

    Invocation inv;
    auto* run = app.add_subcommand("run", "Run a regret experiment and write CSV/JSON results");
    add_config_options(*run, inv);
    run->add_option("--output-dir", inv.output_dir, "Output directory (default: results)");
    run->add_option("--format", inv.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    auto* bounds = app.add_subcommand("check-bounds", "Evaluate the regret bounds and certify them");
    add_config_options(*bounds, inv);
    bounds->add_option("--output-dir", inv.output_dir, "Also write bounds.json here");
    bounds->add_flag("--skip-certification", inv.skip_certification,
                     "Only evaluate the closed forms");

    auto* selftest = app.add_subcommand("selftest", "Run the oracle-equivalence checks");
    selftest->add_option("--seed", inv.seed, "Seed for the random test problems");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) return do_run(inv, out, err);
        if (bounds->parsed()) return do_check_bounds(inv, out);
        return do_selftest(inv, out);
    } catch (const ConfigError& e) {
        err << "metats: " << e.what() << '\n';
        switch (e.kind()) {
            case ConfigError::Kind::kMissingFile: return kExitMissingFile;
            case ConfigError::Kind::kMalformed: return kExitMalformed;
            case ConfigError::Kind::kInvalid: return kExitConfig;
        }
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "metats: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace metats
