#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metats/errors.hpp"
#include "metats/harness.hpp"
#include "support.hpp"

using namespace metats;
namespace fs = std::filesystem;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

ExperimentConfig small_config(Family family = Family::kGaussian) {
    ExperimentConfig c = default_config();
    c.family = family;
    c.tasks = 4;
    c.horizon = 30;
    c.runs = 12;
    if (family == Family::kLinear) {
        c.dim = 2;
        c.arms = 10;
    }
    return c;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("metats_test_" + name);
    fs::remove_all(dir);
    return dir;
}

RegretReport synthetic_report(const std::vector<double>& per_task) {
    RegretReport r;
    r.agents = {"A"};
    r.runs = 1;
    r.tasks = per_task.size();
    std::vector<double> cum;
    double total = 0.0;
    for (double x : per_task) cum.push_back(total += x);
    r.cumulative = {{cum}};
    aggregate(r);
    return r;
}

AgentSpec oracle_spec(InstancePrior prior) {
    AgentSpec spec;
    spec.kind = AgentKind::kOracleTS;
    spec.label = "OracleTS";
    spec.true_instance_prior = std::move(prior);
    return spec;
}

}  // namespace

TEST_CASE("run_task with a point-mass prior on the best arm has zero regret") {
    BanditInstance inst;
    inst.theta = vec({0.1, 0.8});
    inst.noise_sigma = 1.0;
    Agent agent(oracle_spec(GaussianDiagPrior{vec({0.1, 0.8}), 1e-12}));
    RngStream rs = derive_stream(11, 0, 0, Lane::kRewardNoise);
    const RewardTable table = draw_reward_table(inst, 50, rs);
    RngStream as = derive_stream(11, 0, 0, Lane::kGeneral);
    const TaskOutcome out = run_task(agent, inst, table, as);
    CHECK(out.total_regret() == 0.0);
    CHECK(out.log.size() == 50);
    CHECK(out.log.pulls(1) == 50);
    CHECK(out.log.rounds()[7].reward == table(7, 1));
}

TEST_CASE("run_task with a prior pinned on the worse arm pays the full gap every round") {
    BanditInstance inst;
    inst.theta = vec({0.0, 1.0});
    inst.noise_sigma = 1.0;
    Agent agent(oracle_spec(GaussianDiagPrior{vec({1.0, 0.0}), 1e-12}));
    RngStream rs = derive_stream(11, 0, 1, Lane::kRewardNoise);
    const RewardTable table = draw_reward_table(inst, 40, rs);
    RngStream as = derive_stream(11, 0, 1);
    const TaskOutcome out = run_task(agent, inst, table, as);
    CHECK(out.total_regret() == doctest::Approx(40.0));
    for (double r : out.regret) REQUIRE(r >= 0.0);
}

TEST_CASE("run_task rejects a reward table of the wrong width") {
    BanditInstance inst;
    inst.theta = vec({0.0, 1.0});
    Agent agent(oracle_spec(GaussianDiagPrior{vec({0.0, 0.0}), 0.1}));
    RngStream s = derive_stream(11, 0, 2);
    CHECK_THROWS_AS(run_task(agent, inst, RewardTable::Zero(5, 3), s), DomainError);
}

TEST_CASE("oracle ts beats uniform play on bernoulli tasks") {
    const BetaProductPrior truth{{6.0, 2.0}, {2.0, 6.0}};
    RngStream env = derive_stream(12, 0, 0);
    double oracle_total = 0.0;
    double uniform_total = 0.0;
    for (int task = 0; task < 200; ++task) {
        const BanditInstance inst = sample_task_instance(truth, 0.0, env);
        RngStream rs = derive_stream(12, 1, static_cast<std::uint64_t>(task));
        const RewardTable table = draw_reward_table(inst, 100, rs);
        Agent agent(oracle_spec(truth));
        RngStream as = derive_stream(12, 2, static_cast<std::uint64_t>(task));
        oracle_total += run_task(agent, inst, table, as).total_regret();
        const double best = optimal_arm(inst).second;
        uniform_total += 100.0 * (best - inst.theta.mean());
    }
    CHECK(oracle_total < 0.5 * uniform_total);
}

TEST_CASE("reward tables are shared across agents and depend only on the stream") {
    BanditInstance inst;
    inst.family = Family::kBernoulli;
    inst.theta = vec({0.3, 0.6, 0.9});
    RngStream a = derive_stream(13, 2, 5, Lane::kRewardNoise);
    RngStream b = derive_stream(13, 2, 5, Lane::kRewardNoise);
    const RewardTable ta = draw_reward_table(inst, 20, a);
    CHECK(ta.rows() == 20);
    CHECK(ta.cols() == 3);
    CHECK(ta == draw_reward_table(inst, 20, b));
}

TEST_CASE("parallel_for_runs visits every run once and rethrows failures") {
    std::vector<std::atomic<int>> seen(97);
    parallel_for_runs(97, 5, [&](std::size_t run) { seen[run].fetch_add(1); });
    for (const auto& s : seen) REQUIRE(s.load() == 1);

    CHECK_THROWS_AS(parallel_for_runs(20, 4,
                                      [](std::size_t run) {
                                          if (run == 13) throw std::runtime_error("boom");
                                      }),
                    std::runtime_error);
}

TEST_CASE("experiments are deterministic and independent of the thread count") {
    for (auto family : {Family::kGaussian, Family::kBernoulli, Family::kLinear}) {
        CAPTURE(to_string(family));
        const ExperimentConfig c = small_config(family);
        const RegretReport serial = run_experiment(c, 1);
        CHECK(serial == run_experiment(c, 1));
        CHECK(serial == run_experiment(c, 4));
        ExperimentConfig other = c;
        other.master_seed += 1;
        CHECK(!(serial == run_experiment(other, 2)));
    }
}

TEST_CASE("adding an agent leaves the other agents' results unchanged") {
    for (auto family : {Family::kGaussian, Family::kBernoulli, Family::kLinear}) {
        CAPTURE(to_string(family));
        ExperimentConfig c = small_config(family);
        c.agents = {agent_entry_from_label("OracleTS"), agent_entry_from_label("TS")};
        const RegretReport base = run_experiment(c, 2);
        c.agents.insert(c.agents.begin() + 1, agent_entry_from_label("MetaTS"));
        c.agents.push_back(agent_entry_from_label("MetaTSx3"));
        const RegretReport more = run_experiment(c, 2);
        CHECK(base.cumulative[0] == more.cumulative[more.agent_index("OracleTS")]);
        CHECK(base.cumulative[1] == more.cumulative[more.agent_index("TS")]);
    }
}

TEST_CASE("cumulative regret is non-decreasing and report shapes are consistent") {
    const ExperimentConfig c = small_config(Family::kBernoulli);
    const RegretReport r = run_experiment(c, 0);
    CHECK(r.agents == std::vector<std::string>{"OracleTS", "MetaTS", "TS"});
    CHECK(r.runs == c.runs);
    CHECK(r.tasks == c.tasks);
    for (const auto& agent : r.cumulative) {
        REQUIRE(agent.size() == c.runs);
        for (const auto& run : agent) {
            REQUIRE(run.size() == c.tasks);
            REQUIRE(run[0] >= 0.0);
            for (std::size_t s = 1; s < run.size(); ++s) REQUIRE(run[s] >= run[s - 1]);
        }
    }
    REQUIRE(r.true_prior_weight.count("MetaTS") == 1);
    const auto& weights = r.true_prior_weight.at("MetaTS");
    CHECK(weights.size() == c.runs);
    for (const auto& run : weights) {
        for (double w : run) REQUIRE((w >= 0.0 && w <= 1.0));
    }
    CHECK(r.metadata["version"] == std::string(kVersionTag));
    CHECK(r.metadata["seed"] == c.master_seed);
    CHECK(r.metadata["config"]["family"] == "bernoulli");
}

TEST_CASE("aggregate computes mean and standard error across runs") {
    RegretReport r;
    r.agents = {"A"};
    r.runs = 4;
    r.tasks = 1;
    r.cumulative = {{{1.0}, {2.0}, {3.0}, {6.0}}};
    aggregate(r);
    CHECK(r.mean[0][0] == doctest::Approx(3.0));
    // sample variance 14/3, se = sqrt(14/3) / 2
    CHECK(r.standard_error[0][0] == doctest::Approx(std::sqrt(14.0 / 3.0) / 2.0));
    CHECK(r.final_mean("A") == doctest::Approx(3.0));
    CHECK_THROWS_AS(r.agent_index("B"), DomainError);
}

TEST_CASE("pooled standard error") {
    RegretReport r;
    r.agents = {"A", "B"};
    r.runs = 2;
    r.tasks = 1;
    r.cumulative = {{{0.0}, {2.0}}, {{0.0}, {4.0}}};
    aggregate(r);
    CHECK(pooled_standard_error(r, "A", "B") == doctest::Approx(std::sqrt(1.0 + 4.0)));
}

TEST_CASE("regret slope") {
    CHECK(regret_slope(synthetic_report({3.0, 3.0, 3.0, 3.0, 3.0}), "A", 1, 5) == doctest::Approx(3.0));
    CHECK(regret_slope(synthetic_report({0.0, 0.0, 0.0}), "A", 1, 3) == 0.0);
    CHECK(regret_slope(synthetic_report({5.0, 1.0, 2.0, 2.0}), "A", 2, 4) == doctest::Approx(2.0));
    const auto r = synthetic_report({1.0, 2.0, 3.0});
    CHECK_THROWS_AS(regret_slope(r, "A", 2, 2), DomainError);
    CHECK_THROWS_AS(regret_slope(r, "A", 0, 2), DomainError);
    CHECK_THROWS_AS(regret_slope(r, "A", 2, 4), DomainError);
}

TEST_CASE("oracle and agnostic per-task regret does not depend on the task index") {
    ExperimentConfig c = default_config();
    c.tasks = 6;
    c.horizon = 50;
    c.runs = 400;
    c.agents = {agent_entry_from_label("OracleTS"), agent_entry_from_label("TS")};
    const RegretReport r = run_experiment(c, 0);
    for (std::size_t a = 0; a < 2; ++a) {
        std::vector<double> first;
        std::vector<double> last;
        for (const auto& run : r.cumulative[a]) {
            first.push_back(run[0]);
            last.push_back(run[5] - run[4]);
        }
        const double se = std::sqrt((metats::test::variance_of(first) + metats::test::variance_of(last)) /
                                    static_cast<double>(c.runs));
        CHECK(std::abs(metats::test::mean_of(first) - metats::test::mean_of(last)) <= 4.0 * se);
    }
}

TEST_CASE("emitted reports round-trip and are byte-identical across runs") {
    const ExperimentConfig c = small_config(Family::kBernoulli);
    const RegretReport r = run_experiment(c, 3);
    const fs::path a = scratch_dir("emit_a");
    const fs::path b = scratch_dir("emit_b");
    const auto files = emit_report(r, a, ReportFormat::kBoth);
    CHECK(files.size() == 4);
    emit_report(run_experiment(c, 1), b, ReportFormat::kBoth);
    for (const char* name : {"rows.csv", "summary.csv", "metadata.json", "report.json"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }
    CHECK(load_report_json(a / "report.json") == r);

    std::istringstream summary(slurp(a / "summary.csv"));
    std::string line;
    std::getline(summary, line);
    CHECK(line == "agent,task,mean,stderr");
    std::size_t rows = 0;
    while (std::getline(summary, line)) ++rows;
    CHECK(rows == r.agents.size() * c.tasks);

    std::istringstream rows_csv(slurp(a / "rows.csv"));
    std::getline(rows_csv, line);
    CHECK(line == "agent,run,task,cum_regret");
    std::getline(rows_csv, line);
    CHECK(line.rfind("OracleTS,1,1,", 0) == 0);

    const fs::path csv_only = scratch_dir("emit_csv");
    CHECK(emit_report(r, csv_only, ReportFormat::kCsv).size() == 3);
    CHECK(!fs::exists(csv_only / "report.json"));
    const fs::path json_only = scratch_dir("emit_json");
    CHECK(emit_report(r, json_only, ReportFormat::kJson).size() == 1);
    for (const auto& dir : {a, b, csv_only, json_only}) fs::remove_all(dir);

    CHECK(report_format_from_string("both") == ReportFormat::kBoth);
    CHECK_THROWS_AS(report_format_from_string("xml"), DomainError);
}

TEST_CASE("json round trip preserves every double exactly") {
    RegretReport r = synthetic_report({0.1, 1.0 / 3.0, 1e-300, 12345.678901234567});
    r.true_prior_weight["MetaTS"] = {{0.5, 0.7, 0.9, 0.99999999999}};
    r.metadata = {{"seed", 5}};
    CHECK(report_from_json(report_to_json(r)) == r);
}
