#include "metats/posterior.hpp"

#include <algorithm>

#include "metats/detail/overloaded.hpp"
#include "metats/errors.hpp"
#include "metats/sampling.hpp"

namespace metats {

using detail::Overloaded;

void TaskLog::record(std::size_t arm, double reward) {
    if (arm >= pulls_.size()) {
        throw DomainError("TaskLog::record: arm index out of range");
    }
    rounds_.push_back({arm, reward});
    ++pulls_[arm];
}

double TaskLog::reward_sum(std::size_t arm) const {
    std::vector<double> values;
    values.reserve(pulls(arm));
    for (const auto& round : rounds_) {
        if (round.arm == arm) {
            values.push_back(round.reward);
        }
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    return sum;
}

std::size_t TaskLog::positives(std::size_t arm) const {
    std::size_t count = 0;
    for (const auto& round : rounds_) {
        if (round.arm != arm) {
            continue;
        }
        if (round.reward == 1.0) {
            ++count;
        } else if (round.reward != 0.0) {
            throw DomainError("TaskLog::positives: reward is not binary");
        }
    }
    return count;
}

Matrix TaskLog::design(const Matrix& features) const {
    Matrix x(static_cast<Eigen::Index>(rounds_.size()), features.cols());
    for (std::size_t t = 0; t < rounds_.size(); ++t) {
        x.row(static_cast<Eigen::Index>(t)) = features.row(static_cast<Eigen::Index>(rounds_[t].arm));
    }
    return x;
}

Vector TaskLog::rewards() const {
    Vector y(static_cast<Eigen::Index>(rounds_.size()));
    for (std::size_t t = 0; t < rounds_.size(); ++t) {
        y[static_cast<Eigen::Index>(t)] = rounds_[t].reward;
    }
    return y;
}

double GaussianArms::variance(std::size_t arm) const {
    const double noise = sigma * sigma;
    return noise / (noise / (sigma_0 * sigma_0) + static_cast<double>(pulls[arm]));
}

double GaussianArms::mean(std::size_t arm) const {
    const auto i = static_cast<Eigen::Index>(arm);
    return variance(arm) * (prior_mean[i] / (sigma_0 * sigma_0) + reward_sum[i] / (sigma * sigma));
}

TaskPosterior init_task_posterior(const InstancePrior& prior, double noise_sigma) {
    return std::visit(
        Overloaded{
            [](const BetaProductPrior& p) -> TaskPosterior { return BetaCounts{p.alpha, p.beta}; },
            [&](const GaussianDiagPrior& p) -> TaskPosterior {
                return GaussianArms{p.mean, p.sigma_0, noise_sigma,
                                    std::vector<std::size_t>(p.arms(), 0),
                                    Vector::Zero(p.mean.size())};
            },
            [&](const LinearGaussianPrior& p) -> TaskPosterior {
                LinearPosterior post;
                post.mean = p.theta_0;
                const auto cov_factor = checked_cholesky(p.covariance, "task prior covariance");
                post.precision = cov_factor.solve(Matrix::Identity(p.theta_0.size(), p.theta_0.size()));
                post.precision = 0.5 * (post.precision + post.precision.transpose());
                post.precision_times_mean = post.precision * post.mean;
                post.features = p.features;
                post.sigma = noise_sigma;
                post.factor = checked_cholesky(post.precision, "task posterior precision");
                return post;
            },
        },
        prior);
}

std::size_t arms(const TaskPosterior& posterior) {
    return std::visit(Overloaded{
                          [](const BetaCounts& p) { return p.alpha.size(); },
                          [](const GaussianArms& p) { return p.pulls.size(); },
                          [](const LinearPosterior& p) {
                              return static_cast<std::size_t>(p.features.rows());
                          },
                      },
                      posterior);
}

void update_task_posterior(TaskPosterior& posterior, std::size_t arm, double reward) {
    if (arm >= arms(posterior)) {
        throw DomainError("update_task_posterior: arm index out of range");
    }
    std::visit(Overloaded{
                   [&](BetaCounts& p) {
                       if (reward != 0.0 && reward != 1.0) {
                           throw DomainError("update_task_posterior: Bernoulli reward must be 0 or 1");
                       }
                       p.alpha[arm] += reward;
                       p.beta[arm] += 1.0 - reward;
                   },
                   [&](GaussianArms& p) {
                       ++p.pulls[arm];
                       p.reward_sum[static_cast<Eigen::Index>(arm)] += reward;
                   },
                   [&](LinearPosterior& p) {
                       const Vector x = p.features.row(static_cast<Eigen::Index>(arm)).transpose();
                       const double inv_noise = 1.0 / (p.sigma * p.sigma);
                       p.precision.noalias() += inv_noise * x * x.transpose();
                       p.precision_times_mean += inv_noise * reward * x;
                       p.factor = checked_cholesky(p.precision, "task posterior precision");
                       p.mean = p.factor.solve(p.precision_times_mean);
                   },
               },
               posterior);
}

Vector sample_task_posterior(const TaskPosterior& posterior, RngStream& stream) {
    return std::visit(
        Overloaded{
            [&](const BetaCounts& p) {
                Vector draw(static_cast<Eigen::Index>(p.alpha.size()));
                for (std::size_t i = 0; i < p.alpha.size(); ++i) {
                    draw[static_cast<Eigen::Index>(i)] = sample_beta(stream, p.alpha[i], p.beta[i]);
                }
                return draw;
            },
            [&](const GaussianArms& p) {
                Vector draw(p.prior_mean.size());
                for (std::size_t i = 0; i < p.pulls.size(); ++i) {
                    draw[static_cast<Eigen::Index>(i)] = sample_gaussian(stream, p.mean(i), p.variance(i));
                }
                return draw;
            },
            [&](const LinearPosterior& p) -> Vector {
                return p.features * sample_mvn_from_precision(stream, p.mean, p.factor);
            },
        },
        posterior);
}

}  // namespace metats
