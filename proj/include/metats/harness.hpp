#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "metats/agent.hpp"
#include "metats/config.hpp"
#include "metats/environment.hpp"
#include "metats/posterior.hpp"
#include "metats/rng.hpp"

namespace metats {

inline constexpr std::string_view kVersionTag = "metats 1.0.0";

/// Y_{s,t}(a) for every round t and arm a of one task, drawn once so that all
/// agents facing the task see the same reward for the same (round, arm).
using RewardTable = Matrix;  // horizon x K

RewardTable draw_reward_table(const BanditInstance& instance, std::size_t horizon,
                              RngStream& stream);

struct TaskOutcome {
    TaskLog log;
    /// theta(A*) - theta(A_t) for each round; never negative.
    std::vector<double> regret;

    double total_regret() const;
};

/// Plays one full task: begin_task, then select_action / observe for every
/// row of `rewards`, then end_task. Regret uses the true means of `instance`.
/// `on_begin`, when set, sees the agent right after begin_task.
TaskOutcome run_task(Agent& agent, const BanditInstance& instance, const RewardTable& rewards,
                     RngStream& agent_stream,
                     const std::function<void(const Agent&)>& on_begin = {});

/// Q for the configured family. `features` is only read for the linear
/// family.
MetaPrior build_meta_prior(const ExperimentConfig& config, const Matrix& features = {});

/// The agent for `entry` in a run whose true instance prior is `instance_prior`.
AgentSpec make_agent_spec(const ExperimentConfig& config, const AgentEntry& entry,
                          const MetaPrior& meta, const InstancePrior& instance_prior);

/// Calls `body(run)` for run = 0 .. runs-1 on up to `threads` workers
/// (0 = hardware concurrency). The first exception thrown by any run is
/// rethrown after all workers stop.
void parallel_for_runs(std::size_t runs, std::size_t threads,
                       const std::function<void(std::size_t)>& body);

struct RegretReport {
    std::vector<std::string> agents;
    std::size_t runs = 0;
    std::size_t tasks = 0;
    /// [agent][run][task] cumulative pseudo-regret at the end of each task.
    std::vector<std::vector<std::vector<double>>> cumulative;
    /// [agent][task] across runs.
    std::vector<std::vector<double>> mean;
    std::vector<std::vector<double>> standard_error;
    /// Categorical MetaTS agents only: weight of the true candidate prior
    /// after each task's update, [run][task].
    std::map<std::string, std::vector<std::vector<double>>> true_prior_weight;
    nlohmann::json metadata;

    std::size_t agent_index(const std::string& label) const;
    double final_mean(const std::string& label) const;
    double final_standard_error(const std::string& label) const;

    friend bool operator==(const RegretReport&, const RegretReport&) = default;
};

using ProgressCallback = std::function<void(std::size_t runs_done, std::size_t runs_total)>;

/// Runs every configured agent on the same environments for each run and
/// aggregates. Results do not depend on `threads`.
RegretReport run_experiment(const ExperimentConfig& config, std::size_t threads = 0,
                            const ProgressCallback& progress = {});

/// Fills mean and standard_error (sample stddev / sqrt(R)) from cumulative.
void aggregate(RegretReport& report);

/// Least-squares slope of the mean cumulative regret of `label` against task
/// index over tasks first..last (1-based, inclusive).
double regret_slope(const RegretReport& report, const std::string& label, std::size_t first,
                    std::size_t last);

/// sqrt(se_a^2 + se_b^2) of the final-task means.
double pooled_standard_error(const RegretReport& report, const std::string& a,
                             const std::string& b);

enum class ReportFormat { kCsv, kJson, kBoth };

ReportFormat report_format_from_string(std::string_view name);

/// Writes rows.csv, summary.csv and metadata.json (csv), report.json (json),
/// or all four (both). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const RegretReport& report,
                                               const std::filesystem::path& directory,
                                               ReportFormat format);

nlohmann::json report_to_json(const RegretReport& report);
RegretReport report_from_json(const nlohmann::json& object);
RegretReport load_report_json(const std::filesystem::path& path);

}  // namespace metats
