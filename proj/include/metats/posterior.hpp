#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "metats/environment.hpp"
#include "metats/linalg.hpp"
#include "metats/rng.hpp"

namespace metats {

/// History of one task: the (arm, reward) pairs in pull order.
class TaskLog {
public:
    struct Round {
        std::size_t arm;
        double reward;
    };

    TaskLog() = default;
    explicit TaskLog(std::size_t arms) : pulls_(arms, 0) {}

    void record(std::size_t arm, double reward);

    const std::vector<Round>& rounds() const { return rounds_; }
    std::size_t size() const { return rounds_.size(); }
    bool empty() const { return rounds_.empty(); }
    std::size_t arms() const { return pulls_.size(); }

    /// T_i: number of pulls of `arm`.
    std::size_t pulls(std::size_t arm) const { return pulls_.at(arm); }
    /// Sum of the rewards of `arm`. The summands are added in sorted order, so
    /// the result depends only on the multiset of rewards, not on round order.
    double reward_sum(std::size_t arm) const;
    /// N+_i: rewards equal to one. Throws DomainError on a non-binary reward.
    std::size_t positives(std::size_t arm) const;
    /// N-_i = T_i - N+_i.
    std::size_t negatives(std::size_t arm) const { return pulls(arm) - positives(arm); }

    /// Design matrix X_t whose rows are the features of the pulled arms in
    /// pull order, and the matching reward vector y_t.
    Matrix design(const Matrix& features) const;
    Vector rewards() const;

private:
    std::vector<Round> rounds_;
    std::vector<std::size_t> pulls_;
};

// ---------------------------------------------------------------------------
// Within-task posteriors used by Thompson sampling.

struct BetaCounts {
    std::vector<double> alpha;
    std::vector<double> beta;
};

/// Independent normal-normal posteriors with known noise. Stored as the prior
/// plus sufficient statistics so that the variance after N pulls is exactly
/// sigma^2 / (sigma^2 sigma_0^-2 + N).
struct GaussianArms {
    Vector prior_mean;
    double sigma_0 = 0.1;
    double sigma = 1.0;
    std::vector<std::size_t> pulls;
    Vector reward_sum;

    double variance(std::size_t arm) const;
    double mean(std::size_t arm) const;
};

/// Bayesian linear regression posterior N(mean, precision^-1) over theta.
struct LinearPosterior {
    Vector mean;
    Matrix precision;
    Vector precision_times_mean;
    Matrix features;  // K x d
    double sigma = 1.0;
    Eigen::LLT<Matrix> factor;
};

using TaskPosterior = std::variant<BetaCounts, GaussianArms, LinearPosterior>;

/// Posterior at zero observations. `noise_sigma` is the known reward noise
/// (unused for Bernoulli).
TaskPosterior init_task_posterior(const InstancePrior& prior, double noise_sigma);

/// Conjugate update with one observation. Throws DomainError on an arm out of
/// range or a non-binary Bernoulli reward.
void update_task_posterior(TaskPosterior& posterior, std::size_t arm, double reward);

/// One posterior draw of the K arm means.
Vector sample_task_posterior(const TaskPosterior& posterior, RngStream& stream);

std::size_t arms(const TaskPosterior& posterior);

}  // namespace metats
