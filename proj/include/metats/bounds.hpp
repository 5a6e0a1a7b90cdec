#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "metats/config.hpp"

namespace metats {

struct BoundParams {
    std::size_t arms = 2;      // K
    std::size_t horizon = 200; // n
    std::size_t tasks = 20;    // m
    double sigma = 1.0;
    double sigma_0 = 0.1;
    double sigma_q = 0.5;
    double delta = 0.05;

    /// Throws DomainError on a zero count, a nonpositive width or delta
    /// outside (0, 1).
    void validate() const;
};

BoundParams bound_params_from_config(const ExperimentConfig& config);

/// sqrt(n + sigma^2 sigma_0^-2 K) - sqrt(sigma^2 sigma_0^-2 K), evaluated in a
/// cancellation-free form.
double root_difference(std::size_t horizon, std::size_t arms, double sigma, double sigma_0);

/// Bayes regret of TS with the correct Gaussian prior after n rounds, with
/// failure probability `delta` in the concentration step.
double lemma1_bound(const BoundParams& p);

/// Regret difference between TS runs with prior means at max-distance
/// `epsilon`; `mu_star_maxnorm` is the max-norm of the true prior mean.
double lemma2_bound(const BoundParams& p, double mu_star_maxnorm, double epsilon);

/// High-probability max-norm radius of the sampled prior mean around the true
/// prior mean in task s (1-based).
double lemma3_radius(const BoundParams& p, std::size_t task);

struct Theorem1Bound {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    /// c1 sqrt(K) (root difference) m
    double learning_term = 0.0;
    /// c2 c3 K n^2 sqrt(m)
    double meta_term = 0.0;
    double leading = 0.0;
    /// 4 sqrt((sigma_q^2 + sigma_0^2) log(2K/delta)) (n + K m)
    double residue = 0.0;
    double full = 0.0;
};

Theorem1Bound theorem1_bound(const BoundParams& p);

struct Lemma1Certification {
    std::size_t runs = 0;
    double empirical_mean = 0.0;
    double standard_error = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// OracleTS on single Gaussian tasks over `runs` independent runs against
/// lemma1_bound with delta = 1/n. Holds when mean <= bound + 3 stderr.
Lemma1Certification certify_lemma1(const ExperimentConfig& config, std::size_t runs,
                                   std::size_t threads = 0);

struct Lemma3Certification {
    std::size_t replications = 0;
    std::size_t violations = 0;
    double violation_frequency = 0.0;
    /// m delta
    double allowed_frequency = 0.0;
    bool holds = false;
};

/// MetaTS with forced last-K pulls on `config.tasks` Gaussian tasks. A
/// replication violates when any task's sampled prior mean lies farther than
/// lemma3_radius from the true prior mean in max-norm.
Lemma3Certification certify_lemma3(const ExperimentConfig& config, std::size_t replications,
                                   double delta, std::size_t threads = 0);

struct TechnicalLemmaCheck {
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::string first_failure;
    bool passed() const { return failures == 0; }
};

/// Exact partial sums against the closed-form bounds
/// sum 1/sqrt(i+a) <= 2(sqrt(n+a) - sqrt(a)) <= 2 sqrt(n) and
/// sum 1/(i+a) <= log(1 + n/a), for random n <= 10^4 and a in [0, 10^3].
TechnicalLemmaCheck check_technical_lemmas(std::size_t trials, std::uint64_t seed = 2021);

/// Evaluators at `config`, plus certifications unless `certify` is false.
/// Keys: params, leading_terms, full_bound, empirical, violation_frequency.
nlohmann::json bound_report(const ExperimentConfig& config, bool certify, std::size_t threads = 0);

}  // namespace metats
