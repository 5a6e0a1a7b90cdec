#include "metats/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "metats/errors.hpp"
#include "metats/harness.hpp"
#include "metats/sampling.hpp"

namespace metats {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

void require_gaussian(const ExperimentConfig& config, const char* what) {
    if (config.family != Family::kGaussian) {
        throw DomainError(std::string(what) + ": requires the gaussian family");
    }
}

}  // namespace

void BoundParams::validate() const {
    if (arms < 1 || horizon < 1 || tasks < 1) {
        throw DomainError("BoundParams: K, n and m must be positive");
    }
    if (!(sigma > 0.0) || !(sigma_0 > 0.0) || !(sigma_q > 0.0)) {
        throw DomainError("BoundParams: sigma, sigma_0 and sigma_q must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw DomainError("BoundParams: delta must lie in (0, 1)");
    }
}

BoundParams bound_params_from_config(const ExperimentConfig& config) {
    return BoundParams{config.arms,  config.horizon, config.tasks, config.sigma,
                       config.sigma_0, config.sigma_q, config.delta};
}

double root_difference(std::size_t horizon, std::size_t arms, double sigma, double sigma_0) {
    const double n = static_cast<double>(horizon);
    const double offset = sigma * sigma * static_cast<double>(arms) / (sigma_0 * sigma_0);
    return n / (std::sqrt(n + offset) + std::sqrt(offset));
}

double lemma1_bound(const BoundParams& p) {
    p.validate();
    const double k = static_cast<double>(p.arms);
    const double n = static_cast<double>(p.horizon);
    const double log_inv = std::log(1.0 / p.delta);
    const double var0 = p.sigma_0 * p.sigma_0;
    const double c = 2.0 * std::sqrt(2.0 * var0 * log_inv) * k +
                     std::sqrt(2.0 * var0 / kPi) * k * n * p.delta;
    return c + 4.0 * std::sqrt(2.0 * p.sigma * p.sigma * k * log_inv) *
                   root_difference(p.horizon, p.arms, p.sigma, p.sigma_0);
}

double lemma2_bound(const BoundParams& p, double mu_star_maxnorm, double epsilon) {
    p.validate();
    if (epsilon < 0.0 || mu_star_maxnorm < 0.0) {
        throw DomainError("lemma2_bound: epsilon and the max-norm must be nonnegative");
    }
    const double k = static_cast<double>(p.arms);
    const double n = static_cast<double>(p.horizon);
    const double var0 = p.sigma_0 * p.sigma_0;
    const double mismatch = 4.0 * (std::sqrt(var0 / (2.0 * kPi)) + mu_star_maxnorm) * k * n * p.delta;
    const double drift = 2.0 * (mu_star_maxnorm + std::sqrt(2.0 * var0 * std::log(1.0 / p.delta))) *
                         std::sqrt(2.0 / (kPi * var0)) * k * n * n * epsilon;
    return mismatch + drift;
}

double lemma3_radius(const BoundParams& p, std::size_t task) {
    p.validate();
    if (task < 1) {
        throw DomainError("lemma3_radius: task index is 1-based");
    }
    const double total = p.sigma_0 * p.sigma_0 + p.sigma * p.sigma;
    const double effective = total / (p.sigma_q * p.sigma_q) + static_cast<double>(task - 1);
    const double log_term = std::log(4.0 * static_cast<double>(p.arms) / p.delta);
    return 2.0 * std::sqrt(2.0 * total / effective * log_term);
}

Theorem1Bound theorem1_bound(const BoundParams& p) {
    p.validate();
    const double k = static_cast<double>(p.arms);
    const double n = static_cast<double>(p.horizon);
    const double m = static_cast<double>(p.tasks);
    const double var0 = p.sigma_0 * p.sigma_0;
    const double varq = p.sigma_q * p.sigma_q;
    const double log_n = std::log(n);

    Theorem1Bound b;
    b.c1 = 4.0 * std::sqrt(2.0 * p.sigma * p.sigma * log_n);
    b.c2 = 2.0 * (std::sqrt(2.0 * varq * std::log(2.0 * k / p.delta)) + std::sqrt(2.0 * var0 * log_n));
    b.c3 = 8.0 * std::sqrt((var0 + p.sigma * p.sigma) * std::log(4.0 * k / p.delta) / (kPi * var0));
    b.learning_term =
        b.c1 * std::sqrt(k) * root_difference(p.horizon, p.arms, p.sigma, p.sigma_0) * m;
    b.meta_term = b.c2 * b.c3 * k * n * n * std::sqrt(m);
    b.leading = b.learning_term + b.meta_term;
    b.residue = 4.0 * std::sqrt((varq + var0) * std::log(2.0 * k / p.delta)) * (n + k * m);
    b.full = b.leading + b.residue;
    return b;
}

Lemma1Certification certify_lemma1(const ExperimentConfig& config, std::size_t runs,
                                   std::size_t threads) {
    require_gaussian(config, "certify_lemma1");
    ExperimentConfig single = config;
    single.tasks = 1;
    single.runs = runs;
    single.forced_last_k = false;
    single.agents = {agent_entry_from_label("OracleTS")};
    const RegretReport report = run_experiment(single, threads);

    BoundParams p = bound_params_from_config(single);
    p.delta = 1.0 / static_cast<double>(p.horizon);
    if (p.horizon == 1) {
        // delta = 1/n must stay inside (0, 1).
        p.delta = 0.5;
    }

    Lemma1Certification cert;
    cert.runs = runs;
    cert.empirical_mean = report.final_mean("OracleTS");
    cert.standard_error = report.final_standard_error("OracleTS");
    cert.bound = lemma1_bound(p);
    cert.holds = cert.empirical_mean <= cert.bound + 3.0 * cert.standard_error;
    return cert;
}

Lemma3Certification certify_lemma3(const ExperimentConfig& config, std::size_t replications,
                                   double delta, std::size_t threads) {
    require_gaussian(config, "certify_lemma3");
    if (replications < 1) {
        throw DomainError("certify_lemma3: need at least one replication");
    }
    ExperimentConfig forced = config;
    forced.forced_last_k = true;
    forced.delta = delta;
    const BoundParams p = bound_params_from_config(forced);
    p.validate();

    const AgentEntry entry = agent_entry_from_label("MetaTS");
    const std::uint64_t lane = agent_lane(entry.label.c_str());
    std::vector<char> violated(replications, 0);

    parallel_for_runs(replications, threads, [&](std::size_t rep) {
        const std::uint64_t seed = forced.master_seed;
        RngStream prior_stream = derive_stream(seed, rep, 0, Lane::kEnvironmentPrior);
        const MetaPrior meta = build_meta_prior(forced);
        const InstancePrior instance_prior = sample_instance_prior(meta, prior_stream);
        const Vector& mu_star = std::get<GaussianDiagPrior>(instance_prior).mean;
        Agent agent(make_agent_spec(forced, entry, meta, instance_prior));

        for (std::size_t task = 1; task <= forced.tasks; ++task) {
            RngStream instance_stream = derive_stream(seed, rep, task, Lane::kEnvironmentInstance);
            const BanditInstance instance =
                sample_task_instance(instance_prior, forced.sigma, instance_stream);
            RngStream reward_stream = derive_stream(seed, rep, task, Lane::kRewardNoise);
            const RewardTable rewards = draw_reward_table(instance, forced.horizon, reward_stream);
            RngStream agent_stream = derive_stream(seed, rep, task, lane);
            const double radius = lemma3_radius(p, task);
            run_task(agent, instance, rewards, agent_stream, [&](const Agent& a) {
                const Vector& sampled = std::get<GaussianDiagPrior>(*a.current_task_prior()).mean;
                if ((sampled - mu_star).lpNorm<Eigen::Infinity>() > radius) {
                    violated[rep] = 1;
                }
            });
        }
    });

    Lemma3Certification cert;
    cert.replications = replications;
    cert.violations = static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
    cert.violation_frequency =
        static_cast<double>(cert.violations) / static_cast<double>(replications);
    cert.allowed_frequency = static_cast<double>(forced.tasks) * delta;
    cert.holds = cert.violation_frequency <= cert.allowed_frequency;
    return cert;
}

TechnicalLemmaCheck check_technical_lemmas(std::size_t trials, std::uint64_t seed) {
    TechnicalLemmaCheck check;
    check.trials = trials;
    RngStream stream = derive_stream(seed, 0, 0, Lane::kGeneral);
    auto fail = [&check](const std::string& message) {
        if (check.failures++ == 0) {
            check.first_failure = message;
        }
    };
    for (std::size_t trial = 0; trial < trials; ++trial) {
        const auto n = static_cast<std::size_t>(1 + stream() % 10000);
        // One trial in ten sits on the a = 0 boundary.
        const double a = stream() % 10 == 0 ? 0.0 : sample_uniform(stream, 0.0, 1000.0);

        long double root_sum = 0.0L;
        long double harmonic_sum = 0.0L;
        for (std::size_t i = n; i >= 1; --i) {
            const long double x = static_cast<long double>(i) + a;
            root_sum += 1.0L / std::sqrt(x);
            harmonic_sum += 1.0L / x;
        }
        const long double ln = static_cast<long double>(n);
        const long double la = a;
        const long double integral = 2.0L * ln / (std::sqrt(ln + la) + std::sqrt(la));
        const long double cap = 2.0L * std::sqrt(ln);

        std::ostringstream where;
        where << "n=" << n << " a=" << a;
        if (!(root_sum <= integral)) {
            fail("root sum exceeds 2(sqrt(n+a)-sqrt(a)) at " + where.str());
        }
        // Equality at a = 0, so allow a few ulps of rounding.
        if (!(integral <= cap * (1.0L + 16.0L * std::numeric_limits<long double>::epsilon()))) {
            fail("2(sqrt(n+a)-sqrt(a)) exceeds 2 sqrt(n) at " + where.str());
        }
        if (a > 0.0 && !(harmonic_sum <= std::log1p(ln / la))) {
            fail("harmonic sum exceeds log(1+n/a) at " + where.str());
        }
    }
    return check;
}

json bound_report(const ExperimentConfig& config, bool certify, std::size_t threads) {
    const BoundParams p = bound_params_from_config(config);
    p.validate();
    BoundParams per_round = p;
    per_round.delta = p.horizon > 1 ? 1.0 / static_cast<double>(p.horizon) : 0.5;
    const Theorem1Bound t1 = theorem1_bound(p);
    const double marginal_width = std::sqrt(p.sigma_q * p.sigma_q + p.sigma_0 * p.sigma_0);

    json report;
    report["params"] = {{"K", p.arms},         {"n", p.horizon},        {"m", p.tasks},
                        {"sigma", p.sigma},    {"sigma_0", p.sigma_0}, {"sigma_q", p.sigma_q},
                        {"delta", p.delta}};
    report["leading_terms"] = {
        {"root_difference", root_difference(p.horizon, p.arms, p.sigma, p.sigma_0)},
        {"root_difference_marginal", root_difference(p.horizon, p.arms, p.sigma, marginal_width)},
        {"lemma1_bound", lemma1_bound(per_round)},
        {"lemma3_radius_first_task", lemma3_radius(p, 1)},
        {"lemma3_radius_last_task", lemma3_radius(p, p.tasks)},
        {"theorem1",
         {{"c1", t1.c1},
          {"c2", t1.c2},
          {"c3", t1.c3},
          {"learning_term", t1.learning_term},
          {"meta_term", t1.meta_term},
          {"leading", t1.leading}}},
    };
    report["full_bound"] = {{"theorem1", t1.full}, {"residue", t1.residue}};
    report["empirical"] = nullptr;
    report["violation_frequency"] = nullptr;

    if (certify) {
        json empirical;
        const TechnicalLemmaCheck technical = check_technical_lemmas(10000, config.master_seed);
        empirical["technical_lemmas"] = {{"trials", technical.trials},
                                         {"failures", technical.failures},
                                         {"passed", technical.passed()}};
        if (config.family == Family::kGaussian) {
            const Lemma1Certification l1 = certify_lemma1(config, config.certification_runs, threads);
            empirical["lemma1"] = {{"runs", l1.runs},
                                   {"mean_regret", l1.empirical_mean},
                                   {"stderr", l1.standard_error},
                                   {"bound", l1.bound},
                                   {"holds", l1.holds}};
            const Lemma3Certification l3 =
                certify_lemma3(config, config.certification_runs, config.delta, threads);
            empirical["lemma3"] = {{"replications", l3.replications},
                                   {"violations", l3.violations},
                                   {"allowed_frequency", l3.allowed_frequency},
                                   {"holds", l3.holds}};
            report["violation_frequency"] = l3.violation_frequency;
        }
        report["empirical"] = std::move(empirical);
    }
    return report;
}

}  // namespace metats
