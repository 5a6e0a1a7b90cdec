#include "metats/meta_posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "metats/detail/overloaded.hpp"
#include "metats/errors.hpp"
#include "metats/sampling.hpp"
#include "metats/special.hpp"

namespace metats {

using detail::Overloaded;

std::string_view to_string(LinearUpdate mode) {
    return mode == LinearUpdate::kDirect ? "direct" : "woodbury";
}

LinearUpdate linear_update_from_string(std::string_view name) {
    if (name == "direct") return LinearUpdate::kDirect;
    if (name == "woodbury") return LinearUpdate::kWoodbury;
    throw DomainError("unknown linear update mode '" + std::string(name) + "'");
}

MetaPosterior initial_meta_posterior(const MetaPrior& meta, double noise_sigma,
                                     double sigma_q_scale) {
    if (!(sigma_q_scale > 0.0)) {
        throw DomainError("initial_meta_posterior: sigma_q scale must be positive");
    }
    return std::visit(
        Overloaded{
            [](const CategoricalMetaPrior& q) -> MetaPosterior {
                return CategoricalWeights{q.weights, q.priors};
            },
            [&](const GaussianDiagMetaPrior& q) -> MetaPosterior {
                const double width = sigma_q_scale * q.sigma_q;
                const auto k = static_cast<Eigen::Index>(q.arms);
                return GaussianDiagState{Vector::Zero(k), Vector::Constant(k, width * width),
                                         q.sigma_0, noise_sigma};
            },
            [&](const LinearGaussianMetaPrior& q) -> MetaPosterior {
                const double scale_sq = sigma_q_scale * sigma_q_scale;
                return LinearState{q.mu_0, q.precision_0 / scale_sq, q.task_covariance, noise_sigma,
                                   q.features};
            },
        },
        meta);
}

double categorical_log_evidence(const BetaProductPrior& prior, const TaskLog& log) {
    double total = 0.0;
    for (std::size_t i = 0; i < prior.arms(); ++i) {
        const std::size_t pulls = i < log.arms() ? log.pulls(i) : 0;
        if (pulls == 0) {
            continue;
        }
        const double a = prior.alpha[i];
        const double b = prior.beta[i];
        const auto pos = static_cast<double>(log.positives(i));
        const auto neg = static_cast<double>(pulls) - pos;
        total += log_gamma(a + b) + log_gamma(a + pos) + log_gamma(b + neg) - log_gamma(a) -
                 log_gamma(b) - log_gamma(a + b + static_cast<double>(pulls));
    }
    return total;
}

CategoricalWeights update_meta_posterior_categorical(const CategoricalWeights& meta,
                                                     const TaskLog& log) {
    const std::size_t count = meta.weights.size();
    std::vector<double> log_w(count, -std::numeric_limits<double>::infinity());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
        if (meta.weights[j] > 0.0) {
            log_w[j] = std::log(meta.weights[j]) + categorical_log_evidence(meta.priors[j], log);
            max_log = std::max(max_log, log_w[j]);
        }
    }
    if (!std::isfinite(max_log)) {
        throw NumericalError("update_meta_posterior_categorical: all weights vanished");
    }

    CategoricalWeights next{std::vector<double>(count, 0.0), meta.priors};
    double total = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        next.weights[j] = std::exp(log_w[j] - max_log);
        total += next.weights[j];
    }
    double kept = 0.0;
    for (double& w : next.weights) {
        w /= total;
        if (w < kWeightFloor) {
            w = 0.0;
        }
        kept += w;
    }
    for (double& w : next.weights) {
        w /= kept;
    }
    return next;
}

GaussianDiagState update_meta_posterior_gaussian(const GaussianDiagState& meta, const TaskLog& log) {
    GaussianDiagState next = meta;
    const double noise = meta.sigma * meta.sigma;
    const double width = meta.sigma_0 * meta.sigma_0;
    for (Eigen::Index i = 0; i < meta.mean.size(); ++i) {
        const auto arm = static_cast<std::size_t>(i);
        const std::size_t pulls = arm < log.arms() ? log.pulls(arm) : 0;
        if (pulls == 0) {
            continue;
        }
        const auto t = static_cast<double>(pulls);
        const double old_precision = 1.0 / meta.variance[i];
        const double weight = t / (t * width + noise);
        const double mean_reward = log.reward_sum(arm) / t;
        const double precision = old_precision + weight;
        next.variance[i] = 1.0 / precision;
        next.mean[i] = next.variance[i] * (meta.mean[i] * old_precision + mean_reward * weight);
    }
    return next;
}

LinearState update_meta_posterior_linear(const LinearState& meta, const Matrix& design,
                                         const Vector& rewards, LinearUpdate mode) {
    if (design.rows() != rewards.size() || (design.rows() > 0 && design.cols() != meta.mean.size())) {
        throw DomainError("update_meta_posterior_linear: design and rewards disagree in shape");
    }
    if (design.rows() == 0) {
        return meta;
    }
    const double noise = meta.sigma * meta.sigma;
    const auto d = meta.mean.size();
    const Vector prior_term = meta.precision * meta.mean;

    Matrix precision;
    Vector natural;
    if (mode == LinearUpdate::kDirect) {
        // Lambda_t = Lambda + X^T (sigma^2 I + X Sigma X^T)^-1 X
        Matrix marginal = design * meta.task_covariance * design.transpose();
        marginal.diagonal().array() += noise;
        const auto factor = checked_cholesky(marginal, "marginal reward covariance");
        precision = meta.precision + design.transpose() * factor.solve(design);
        natural = prior_term + design.transpose() * factor.solve(rewards);
    } else {
        // Same update after Woodbury on (sigma^2 I + X Sigma X^T)^-1, in d x d form.
        const Matrix gram = design.transpose() * design / noise;   // S_t / sigma^2
        const Vector moment = design.transpose() * rewards / noise;  // c_t / sigma^2
        const auto cov_factor = checked_cholesky(meta.task_covariance, "task covariance");
        Matrix inner = cov_factor.solve(Matrix::Identity(d, d)) + gram;
        inner = 0.5 * (inner + inner.transpose());
        const auto inner_factor = checked_cholesky(inner, "Woodbury inner matrix");
        precision = meta.precision + gram - gram * inner_factor.solve(gram);
        natural = prior_term + moment - gram * inner_factor.solve(moment);
    }
    precision = 0.5 * (precision + precision.transpose());
    const auto factor = checked_cholesky(precision, "meta-posterior precision");

    LinearState next = meta;
    next.precision = std::move(precision);
    next.mean = factor.solve(natural);
    return next;
}

LinearState update_meta_posterior_linear(const LinearState& meta, const TaskLog& log,
                                         LinearUpdate mode) {
    return update_meta_posterior_linear(meta, log.design(meta.features), log.rewards(), mode);
}

MetaPosterior update_meta_posterior(const MetaPosterior& meta, const TaskLog& log,
                                    LinearUpdate mode) {
    return std::visit(Overloaded{
                          [&](const CategoricalWeights& q) -> MetaPosterior {
                              return update_meta_posterior_categorical(q, log);
                          },
                          [&](const GaussianDiagState& q) -> MetaPosterior {
                              return update_meta_posterior_gaussian(q, log);
                          },
                          [&](const LinearState& q) -> MetaPosterior {
                              return update_meta_posterior_linear(q, log, mode);
                          },
                      },
                      meta);
}

InstancePrior sample_meta_posterior(const MetaPosterior& meta, RngStream& stream) {
    return std::visit(
        Overloaded{
            [&](const CategoricalWeights& q) -> InstancePrior {
                return q.priors[sample_categorical(stream, q.weights)];
            },
            [&](const GaussianDiagState& q) -> InstancePrior {
                Vector mean(q.mean.size());
                for (Eigen::Index i = 0; i < mean.size(); ++i) {
                    mean[i] = sample_gaussian(stream, q.mean[i], q.variance[i]);
                }
                return GaussianDiagPrior{std::move(mean), q.sigma_0};
            },
            [&](const LinearState& q) -> InstancePrior {
                const auto factor = checked_cholesky(q.precision, "meta-posterior precision");
                return LinearGaussianPrior{sample_mvn_from_precision(stream, q.mean, factor),
                                           q.task_covariance, q.features};
            },
        },
        meta);
}

}  // namespace metats
