#include "metats/environment.hpp"

#include <cmath>
#include <string>

#include "metats/detail/overloaded.hpp"
#include "metats/errors.hpp"
#include "metats/sampling.hpp"

namespace metats {

namespace {

using detail::Overloaded;

void validate_beta_product(const BetaProductPrior& prior) {
    if (prior.alpha.empty() || prior.alpha.size() != prior.beta.size()) {
        throw DomainError("BetaProductPrior: alpha and beta must be nonempty and equal length");
    }
    for (std::size_t i = 0; i < prior.alpha.size(); ++i) {
        if (!(prior.alpha[i] > 0.0) || !(prior.beta[i] > 0.0)) {
            throw DomainError("BetaProductPrior: shapes must be strictly positive");
        }
    }
}

}  // namespace

std::string_view to_string(Family family) {
    switch (family) {
        case Family::kBernoulli: return "bernoulli";
        case Family::kGaussian: return "gaussian";
        case Family::kLinear: return "linear";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "bernoulli") return Family::kBernoulli;
    if (name == "gaussian") return Family::kGaussian;
    if (name == "linear") return Family::kLinear;
    throw DomainError("unknown bandit family '" + std::string(name) + "'");
}

std::size_t arms(const InstancePrior& prior) {
    return std::visit([](const auto& p) { return p.arms(); }, prior);
}

Family family_of(const InstancePrior& prior) {
    return std::visit(Overloaded{
                          [](const BetaProductPrior&) { return Family::kBernoulli; },
                          [](const GaussianDiagPrior&) { return Family::kGaussian; },
                          [](const LinearGaussianPrior&) { return Family::kLinear; },
                      },
                      prior);
}

Family family_of(const MetaPrior& meta) {
    return std::visit(Overloaded{
                          [](const CategoricalMetaPrior&) { return Family::kBernoulli; },
                          [](const GaussianDiagMetaPrior&) { return Family::kGaussian; },
                          [](const LinearGaussianMetaPrior&) { return Family::kLinear; },
                      },
                      meta);
}

void validate(const InstancePrior& prior) {
    std::visit(Overloaded{
                   [](const BetaProductPrior& p) { validate_beta_product(p); },
                   [](const GaussianDiagPrior& p) {
                       if (p.mean.size() == 0 || !(p.sigma_0 > 0.0)) {
                           throw DomainError("GaussianDiagPrior: need K >= 1 and sigma_0 > 0");
                       }
                   },
                   [](const LinearGaussianPrior& p) {
                       const auto d = p.theta_0.size();
                       if (d == 0 || p.features.cols() != d || p.features.rows() == 0 ||
                           p.covariance.rows() != d || !is_symmetric(p.covariance)) {
                           throw DomainError("LinearGaussianPrior: inconsistent dimensions");
                       }
                   },
               },
               prior);
}

void validate(const MetaPrior& meta) {
    std::visit(Overloaded{
                   [](const CategoricalMetaPrior& q) {
                       validate_probability_vector(q.weights, "CategoricalMetaPrior");
                       if (q.priors.size() != q.weights.size()) {
                           throw DomainError("CategoricalMetaPrior: one prior per weight");
                       }
                       for (const auto& p : q.priors) {
                           validate_beta_product(p);
                           if (p.arms() != q.priors.front().arms()) {
                               throw DomainError("CategoricalMetaPrior: arm counts differ");
                           }
                       }
                   },
                   [](const GaussianDiagMetaPrior& q) {
                       if (!(q.sigma_q > 0.0) || !(q.sigma_0 > 0.0) || q.arms == 0) {
                           throw DomainError("GaussianDiagMetaPrior: need sigma_q, sigma_0 > 0, K >= 1");
                       }
                   },
                   [](const LinearGaussianMetaPrior& q) {
                       const auto d = q.mu_0.size();
                       if (d == 0 || q.features.cols() != d || q.features.rows() == 0 ||
                           q.precision_0.rows() != d || q.task_covariance.rows() != d) {
                           throw DomainError("LinearGaussianMetaPrior: inconsistent dimensions");
                       }
                       require_spd(q.precision_0, "LinearGaussianMetaPrior precision");
                       require_spd(q.task_covariance, "LinearGaussianMetaPrior task covariance");
                   },
               },
               meta);
}

InstancePrior sample_instance_prior(const MetaPrior& meta, RngStream& stream) {
    return std::visit(
        Overloaded{
            [&](const CategoricalMetaPrior& q) -> InstancePrior {
                return q.priors[sample_categorical(stream, q.weights)];
            },
            [&](const GaussianDiagMetaPrior& q) -> InstancePrior {
                Vector mean(static_cast<Eigen::Index>(q.arms));
                for (Eigen::Index i = 0; i < mean.size(); ++i) {
                    mean[i] = sample_gaussian(stream, 0.0, q.sigma_q * q.sigma_q);
                }
                return GaussianDiagPrior{std::move(mean), q.sigma_0};
            },
            [&](const LinearGaussianMetaPrior& q) -> InstancePrior {
                const auto factor = checked_cholesky(q.precision_0, "meta-prior precision");
                return LinearGaussianPrior{sample_mvn_from_precision(stream, q.mu_0, factor),
                                           q.task_covariance, q.features};
            },
        },
        meta);
}

BanditInstance sample_task_instance(const InstancePrior& prior, double noise_sigma,
                                    RngStream& stream) {
    return std::visit(
        Overloaded{
            [&](const BetaProductPrior& p) {
                BanditInstance instance{Family::kBernoulli, Vector(p.arms()), 0.0, {}};
                for (std::size_t i = 0; i < p.arms(); ++i) {
                    instance.theta[static_cast<Eigen::Index>(i)] =
                        sample_beta(stream, p.alpha[i], p.beta[i]);
                }
                return instance;
            },
            [&](const GaussianDiagPrior& p) {
                BanditInstance instance{Family::kGaussian, Vector(p.mean.size()), noise_sigma, {}};
                const double variance = p.sigma_0 * p.sigma_0;
                for (Eigen::Index i = 0; i < p.mean.size(); ++i) {
                    instance.theta[i] = sample_gaussian(stream, p.mean[i], variance);
                }
                return instance;
            },
            [&](const LinearGaussianPrior& p) {
                Vector latent = sample_mvn_from_covariance(stream, p.theta_0, p.covariance);
                Vector theta = p.features * latent;
                return BanditInstance{Family::kLinear, std::move(theta), noise_sigma,
                                      std::move(latent)};
            },
        },
        prior);
}

double sample_reward(const BanditInstance& instance, std::size_t arm, RngStream& stream) {
    if (arm >= instance.arms()) {
        throw DomainError("sample_reward: arm index out of range");
    }
    const double mean = instance.theta[static_cast<Eigen::Index>(arm)];
    if (instance.family == Family::kBernoulli) {
        return static_cast<double>(sample_bernoulli(stream, mean));
    }
    return sample_gaussian(stream, mean, instance.noise_sigma * instance.noise_sigma);
}

std::pair<std::size_t, double> optimal_arm(const BanditInstance& instance) {
    if (instance.arms() == 0) {
        throw DomainError("optimal_arm: instance has no arms");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < instance.arms(); ++i) {
        if (instance.theta[static_cast<Eigen::Index>(i)] >
            instance.theta[static_cast<Eigen::Index>(best)]) {
            best = i;
        }
    }
    return {best, instance.theta[static_cast<Eigen::Index>(best)]};
}

Matrix sample_arm_features(RngStream& stream, std::size_t arms, std::size_t dim) {
    Matrix features(static_cast<Eigen::Index>(arms), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        for (Eigen::Index j = 0; j < features.cols(); ++j) {
            features(i, j) = sample_uniform(stream, -0.5, 0.5);
        }
    }
    return features;
}

}  // namespace metats
