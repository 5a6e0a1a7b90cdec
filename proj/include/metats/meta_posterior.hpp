#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "metats/environment.hpp"
#include "metats/linalg.hpp"
#include "metats/posterior.hpp"

namespace metats {

/// Weights below this after normalization are set to zero.
inline constexpr double kWeightFloor = 1e-300;

/// Q_s = Cat(weights) over fixed Beta-product candidates.
struct CategoricalWeights {
    std::vector<double> weights;
    std::vector<BetaProductPrior> priors;
};

/// Q_s = N(mean, diag(variance)) over the instance-prior means.
struct GaussianDiagState {
    Vector mean;
    Vector variance;
    double sigma_0 = 0.1;
    double sigma = 1.0;
};

/// Q_t = N(mean, precision^-1) over theta_0 of the linear model.
struct LinearState {
    Vector mean;
    Matrix precision;
    Matrix task_covariance;
    double sigma = 1.0;
    Matrix features;  // K x d
};

using MetaPosterior = std::variant<CategoricalWeights, GaussianDiagState, LinearState>;

enum class LinearUpdate { kDirect, kWoodbury };

std::string_view to_string(LinearUpdate mode);
LinearUpdate linear_update_from_string(std::string_view name);

/// Q_1 = Q. `sigma_q_scale` multiplies the believed meta-prior width of the
/// Gaussian and linear families (1 for a well-specified agent); it has no
/// effect on a categorical meta-prior.
MetaPosterior initial_meta_posterior(const MetaPrior& meta, double noise_sigma,
                                     double sigma_q_scale = 1.0);

/// log f(j) = log of the marginal likelihood of a Bernoulli task history
/// under the Beta-product prior P^(j).
double categorical_log_evidence(const BetaProductPrior& prior, const TaskLog& log);

CategoricalWeights update_meta_posterior_categorical(const CategoricalWeights& meta,
                                                     const TaskLog& log);

GaussianDiagState update_meta_posterior_gaussian(const GaussianDiagState& meta, const TaskLog& log);

/// Update from a design matrix (rows = pulled-arm features, in pull order)
/// and the matching rewards.
LinearState update_meta_posterior_linear(const LinearState& meta, const Matrix& design,
                                         const Vector& rewards, LinearUpdate mode);
LinearState update_meta_posterior_linear(const LinearState& meta, const TaskLog& log,
                                         LinearUpdate mode);

/// Family dispatch of the three updates above.
MetaPosterior update_meta_posterior(const MetaPosterior& meta, const TaskLog& log,
                                    LinearUpdate mode = LinearUpdate::kWoodbury);

/// P_s ~ Q_s.
InstancePrior sample_meta_posterior(const MetaPosterior& meta, RngStream& stream);

}  // namespace metats
