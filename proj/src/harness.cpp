#include "metats/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "metats/errors.hpp"

namespace metats {

using nlohmann::json;

namespace {

std::string format_real(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw std::runtime_error("error while writing '" + path.string() + "'");
    }
}

std::size_t find_candidate(const CategoricalMetaPrior& meta, const InstancePrior& drawn) {
    const auto& prior = std::get<BetaProductPrior>(drawn);
    for (std::size_t j = 0; j < meta.priors.size(); ++j) {
        if (meta.priors[j] == prior) {
            return j;
        }
    }
    throw std::logic_error("sampled instance prior is not one of the candidates");
}

struct RunResult {
    std::vector<std::vector<double>> cumulative;              // [agent][task]
    std::map<std::string, std::vector<double>> prior_weight;  // label -> [task]
};

RunResult simulate_run(const ExperimentConfig& config, std::size_t run) {
    const std::uint64_t seed = config.master_seed;
    RngStream prior_stream = derive_stream(seed, run, 0, Lane::kEnvironmentPrior);
    Matrix features;
    if (config.family == Family::kLinear) {
        features = sample_arm_features(prior_stream, config.arms, config.dim);
    }
    const MetaPrior meta = build_meta_prior(config, features);
    const InstancePrior instance_prior = sample_instance_prior(meta, prior_stream);

    std::optional<std::size_t> true_candidate;
    if (const auto* table = std::get_if<CategoricalMetaPrior>(&meta)) {
        true_candidate = find_candidate(*table, instance_prior);
    }

    std::vector<Agent> agents;
    agents.reserve(config.agents.size());
    for (const auto& entry : config.agents) {
        agents.emplace_back(make_agent_spec(config, entry, meta, instance_prior));
    }

    RunResult result;
    result.cumulative.assign(agents.size(), std::vector<double>(config.tasks, 0.0));
    std::vector<double> running(agents.size(), 0.0);

    for (std::size_t task = 1; task <= config.tasks; ++task) {
        RngStream instance_stream = derive_stream(seed, run, task, Lane::kEnvironmentInstance);
        const BanditInstance instance =
            sample_task_instance(instance_prior, config.sigma, instance_stream);
        RngStream reward_stream = derive_stream(seed, run, task, Lane::kRewardNoise);
        const RewardTable rewards = draw_reward_table(instance, config.horizon, reward_stream);

        for (std::size_t a = 0; a < agents.size(); ++a) {
            const std::string& label = config.agents[a].label;
            RngStream agent_stream = derive_stream(seed, run, task, agent_lane(label.c_str()));
            const TaskOutcome outcome = run_task(agents[a], instance, rewards, agent_stream);
            running[a] += outcome.total_regret();
            result.cumulative[a][task - 1] = running[a];

            if (true_candidate && agents[a].meta()) {
                const auto& weights = std::get<CategoricalWeights>(*agents[a].meta()).weights;
                auto& series = result.prior_weight[label];
                series.resize(config.tasks, 0.0);
                series[task - 1] = weights[*true_candidate];
            }
        }
    }
    return result;
}

}  // namespace

RewardTable draw_reward_table(const BanditInstance& instance, std::size_t horizon,
                              RngStream& stream) {
    const auto k = static_cast<Eigen::Index>(instance.arms());
    RewardTable table(static_cast<Eigen::Index>(horizon), k);
    for (Eigen::Index t = 0; t < table.rows(); ++t) {
        for (Eigen::Index a = 0; a < k; ++a) {
            table(t, a) = sample_reward(instance, static_cast<std::size_t>(a), stream);
        }
    }
    return table;
}

double TaskOutcome::total_regret() const {
    double total = 0.0;
    for (double r : regret) {
        total += r;
    }
    return total;
}

TaskOutcome run_task(Agent& agent, const BanditInstance& instance, const RewardTable& rewards,
                     RngStream& agent_stream, const std::function<void(const Agent&)>& on_begin) {
    if (static_cast<std::size_t>(rewards.cols()) != instance.arms()) {
        throw DomainError("run_task: reward table width does not match the arm count");
    }
    const auto horizon = static_cast<std::size_t>(rewards.rows());
    const double best = optimal_arm(instance).second;

    agent.begin_task(agent_stream, horizon);
    if (on_begin) {
        on_begin(agent);
    }
    TaskOutcome outcome;
    outcome.regret.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t arm = agent.select_action(agent_stream);
        agent.observe(arm, rewards(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(arm)));
        outcome.regret.push_back(best - instance.theta[static_cast<Eigen::Index>(arm)]);
    }
    outcome.log = agent.task_log();
    agent.end_task();
    return outcome;
}

MetaPrior build_meta_prior(const ExperimentConfig& config, const Matrix& features) {
    switch (config.family) {
        case Family::kBernoulli:
            return config.categorical;
        case Family::kGaussian:
            return GaussianDiagMetaPrior{config.sigma_q, config.arms, config.sigma_0};
        case Family::kLinear: {
            const auto d = static_cast<Eigen::Index>(config.dim);
            if (features.rows() != static_cast<Eigen::Index>(config.arms) || features.cols() != d) {
                throw DomainError("build_meta_prior: feature matrix must be K x d");
            }
            return LinearGaussianMetaPrior{
                Vector::Zero(d),
                Matrix::Identity(d, d) / (config.sigma_q * config.sigma_q),
                Matrix::Identity(d, d) * (config.sigma_0 * config.sigma_0),
                features,
            };
        }
    }
    throw DomainError("build_meta_prior: unknown family");
}

AgentSpec make_agent_spec(const ExperimentConfig& config, const AgentEntry& entry,
                          const MetaPrior& meta, const InstancePrior& instance_prior) {
    AgentSpec spec;
    spec.kind = entry.kind;
    spec.label = entry.label;
    spec.forced_last_k = config.forced_last_k;
    spec.noise_sigma = config.sigma;
    spec.linear_update = config.linear_update;
    switch (entry.kind) {
        case AgentKind::kMetaTS:
            spec.meta_prior = meta;
            spec.misspecification_scale = entry.misspecification_scale;
            break;
        case AgentKind::kOracleTS:
            spec.true_instance_prior = instance_prior;
            break;
        case AgentKind::kAgnosticTS:
            spec.agnostic_prior = agnostic_prior(meta);
            break;
    }
    return spec;
}

void parallel_for_runs(std::size_t runs, std::size_t threads,
                       const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, runs);
    if (threads <= 1) {
        for (std::size_t run = 0; run < runs; ++run) {
            body(run);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t run = next.fetch_add(1);
            if (run >= runs) {
                return;
            }
            try {
                body(run);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& thread : pool) {
        thread.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::size_t RegretReport::agent_index(const std::string& label) const {
    const auto it = std::find(agents.begin(), agents.end(), label);
    if (it == agents.end()) {
        throw DomainError("report has no agent '" + label + "'");
    }
    return static_cast<std::size_t>(it - agents.begin());
}

double RegretReport::final_mean(const std::string& label) const {
    return mean.at(agent_index(label)).back();
}

double RegretReport::final_standard_error(const std::string& label) const {
    return standard_error.at(agent_index(label)).back();
}

void aggregate(RegretReport& report) {
    const std::size_t n_agents = report.agents.size();
    report.mean.assign(n_agents, std::vector<double>(report.tasks, 0.0));
    report.standard_error.assign(n_agents, std::vector<double>(report.tasks, 0.0));
    const auto runs = static_cast<double>(report.runs);
    for (std::size_t a = 0; a < n_agents; ++a) {
        for (std::size_t s = 0; s < report.tasks; ++s) {
            double sum = 0.0;
            for (std::size_t r = 0; r < report.runs; ++r) {
                sum += report.cumulative[a][r][s];
            }
            const double m = sum / runs;
            double squares = 0.0;
            for (std::size_t r = 0; r < report.runs; ++r) {
                const double diff = report.cumulative[a][r][s] - m;
                squares += diff * diff;
            }
            report.mean[a][s] = m;
            report.standard_error[a][s] =
                report.runs > 1 ? std::sqrt(squares / (runs - 1.0)) / std::sqrt(runs) : 0.0;
        }
    }
}

RegretReport run_experiment(const ExperimentConfig& config, std::size_t threads,
                            const ProgressCallback& progress) {
    config.validate();
    std::vector<RunResult> results(config.runs);
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    parallel_for_runs(config.runs, threads, [&](std::size_t run) {
        results[run] = simulate_run(config, run);
        const std::size_t finished = done.fetch_add(1) + 1;
        if (progress) {
            const std::lock_guard lock(progress_mutex);
            progress(finished, config.runs);
        }
    });

    RegretReport report;
    for (const auto& entry : config.agents) {
        report.agents.push_back(entry.label);
    }
    report.runs = config.runs;
    report.tasks = config.tasks;
    report.cumulative.assign(report.agents.size(), {});
    for (std::size_t run = 0; run < config.runs; ++run) {
        for (std::size_t a = 0; a < report.agents.size(); ++a) {
            report.cumulative[a].push_back(std::move(results[run].cumulative[a]));
        }
        for (auto& [label, series] : results[run].prior_weight) {
            report.true_prior_weight[label].push_back(std::move(series));
        }
    }
    aggregate(report);
    report.metadata = json{
        {"version", std::string(kVersionTag)},
        {"seed", config.master_seed},
        {"regret", "pseudo"},
        {"standard_error", "sample standard deviation across runs / sqrt(runs)"},
        {"config", to_json(config)},
    };
    return report;
}

double regret_slope(const RegretReport& report, const std::string& label, std::size_t first,
                    std::size_t last) {
    if (first < 1 || last > report.tasks || last < first + 1) {
        throw DomainError("regret_slope: window must cover at least 2 tasks within [1, m]");
    }
    const auto& curve = report.mean.at(report.agent_index(label));
    const auto count = static_cast<double>(last - first + 1);
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t s = first; s <= last; ++s) {
        mean_x += static_cast<double>(s);
        mean_y += curve[s - 1];
    }
    mean_x /= count;
    mean_y /= count;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t s = first; s <= last; ++s) {
        const double dx = static_cast<double>(s) - mean_x;
        sxy += dx * (curve[s - 1] - mean_y);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

double pooled_standard_error(const RegretReport& report, const std::string& a,
                             const std::string& b) {
    const double se_a = report.final_standard_error(a);
    const double se_b = report.final_standard_error(b);
    return std::sqrt(se_a * se_a + se_b * se_b);
}

ReportFormat report_format_from_string(std::string_view name) {
    if (name == "csv") return ReportFormat::kCsv;
    if (name == "json") return ReportFormat::kJson;
    if (name == "both") return ReportFormat::kBoth;
    throw DomainError("unknown report format '" + std::string(name) + "'");
}

json report_to_json(const RegretReport& report) {
    json rows = json::array();
    json summary = json::array();
    for (std::size_t a = 0; a < report.agents.size(); ++a) {
        for (std::size_t r = 0; r < report.runs; ++r) {
            for (std::size_t s = 0; s < report.tasks; ++s) {
                rows.push_back({{"agent", report.agents[a]},
                                {"run", r + 1},
                                {"task", s + 1},
                                {"cum_regret", report.cumulative[a][r][s]}});
            }
        }
        for (std::size_t s = 0; s < report.tasks; ++s) {
            summary.push_back({{"agent", report.agents[a]},
                               {"task", s + 1},
                               {"mean", report.mean[a][s]},
                               {"stderr", report.standard_error[a][s]}});
        }
    }
    return json{
        {"metadata", report.metadata},
        {"agents", report.agents},
        {"runs", report.runs},
        {"tasks", report.tasks},
        {"rows", std::move(rows)},
        {"summary", std::move(summary)},
        {"true_prior_weight", report.true_prior_weight},
    };
}

RegretReport report_from_json(const json& object) {
    RegretReport report;
    report.metadata = object.at("metadata");
    report.agents = object.at("agents").get<std::vector<std::string>>();
    report.runs = object.at("runs").get<std::size_t>();
    report.tasks = object.at("tasks").get<std::size_t>();
    const std::size_t n_agents = report.agents.size();
    report.cumulative.assign(
        n_agents, std::vector<std::vector<double>>(report.runs, std::vector<double>(report.tasks)));
    report.mean.assign(n_agents, std::vector<double>(report.tasks));
    report.standard_error.assign(n_agents, std::vector<double>(report.tasks));
    for (const auto& row : object.at("rows")) {
        const std::size_t a = report.agent_index(row.at("agent").get<std::string>());
        report.cumulative[a].at(row.at("run").get<std::size_t>() - 1)
            .at(row.at("task").get<std::size_t>() - 1) = row.at("cum_regret").get<double>();
    }
    for (const auto& row : object.at("summary")) {
        const std::size_t a = report.agent_index(row.at("agent").get<std::string>());
        const std::size_t s = row.at("task").get<std::size_t>() - 1;
        report.mean[a].at(s) = row.at("mean").get<double>();
        report.standard_error[a].at(s) = row.at("stderr").get<double>();
    }
    report.true_prior_weight =
        object.at("true_prior_weight")
            .get<std::map<std::string, std::vector<std::vector<double>>>>();
    return report;
}

RegretReport load_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open report '" + path.string() + "'");
    }
    return report_from_json(json::parse(in));
}

std::vector<std::filesystem::path> emit_report(const RegretReport& report,
                                               const std::filesystem::path& directory,
                                               ReportFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + directory.string() +
                                 "': " + ec.message());
    }
    std::vector<std::filesystem::path> written;

    if (format == ReportFormat::kCsv || format == ReportFormat::kBoth) {
        const auto rows_path = directory / "rows.csv";
        auto rows = open_output(rows_path);
        rows << "agent,run,task,cum_regret\n";
        for (std::size_t a = 0; a < report.agents.size(); ++a) {
            for (std::size_t r = 0; r < report.runs; ++r) {
                for (std::size_t s = 0; s < report.tasks; ++s) {
                    rows << report.agents[a] << ',' << r + 1 << ',' << s + 1 << ','
                         << format_real(report.cumulative[a][r][s]) << '\n';
                }
            }
        }
        finish_output(rows, rows_path);
        written.push_back(rows_path);

        const auto summary_path = directory / "summary.csv";
        auto summary = open_output(summary_path);
        summary << "agent,task,mean,stderr\n";
        for (std::size_t a = 0; a < report.agents.size(); ++a) {
            for (std::size_t s = 0; s < report.tasks; ++s) {
                summary << report.agents[a] << ',' << s + 1 << ',' << format_real(report.mean[a][s])
                        << ',' << format_real(report.standard_error[a][s]) << '\n';
            }
        }
        finish_output(summary, summary_path);
        written.push_back(summary_path);

        const auto metadata_path = directory / "metadata.json";
        auto metadata = open_output(metadata_path);
        metadata << report.metadata.dump(2) << '\n';
        finish_output(metadata, metadata_path);
        written.push_back(metadata_path);
    }
    if (format == ReportFormat::kJson || format == ReportFormat::kBoth) {
        const auto report_path = directory / "report.json";
        auto out = open_output(report_path);
        out << report_to_json(report).dump() << '\n';
        finish_output(out, report_path);
        written.push_back(report_path);
    }
    return written;
}

}  // namespace metats
