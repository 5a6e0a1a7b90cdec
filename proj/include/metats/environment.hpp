#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "metats/linalg.hpp"
#include "metats/rng.hpp"

namespace metats {

enum class Family { kBernoulli, kGaussian, kLinear };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

// ---------------------------------------------------------------------------
// Instance priors: distributions over arm means.

/// prod_i Beta(theta_i; alpha_i, beta_i)
struct BetaProductPrior {
    std::vector<double> alpha;
    std::vector<double> beta;

    std::size_t arms() const { return alpha.size(); }
    friend bool operator==(const BetaProductPrior&, const BetaProductPrior&) = default;
};

/// N(mean, sigma_0^2 I_K)
struct GaussianDiagPrior {
    Vector mean;
    double sigma_0 = 0.1;

    std::size_t arms() const { return static_cast<std::size_t>(mean.size()); }
};

/// theta ~ N(theta_0, covariance) in R^d; arm means are features * theta.
struct LinearGaussianPrior {
    Vector theta_0;
    Matrix covariance;
    Matrix features;  // K x d

    std::size_t arms() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
};

using InstancePrior = std::variant<BetaProductPrior, GaussianDiagPrior, LinearGaussianPrior>;

std::size_t arms(const InstancePrior& prior);
Family family_of(const InstancePrior& prior);
void validate(const InstancePrior& prior);

// ---------------------------------------------------------------------------
// Meta-priors: distributions over instance priors.

/// Cat(weights) over a fixed list of Beta-product priors.
struct CategoricalMetaPrior {
    std::vector<double> weights;
    std::vector<BetaProductPrior> priors;
};

/// Prior means mu ~ N(0, sigma_q^2 I_K); the instance width sigma_0 is known.
struct GaussianDiagMetaPrior {
    double sigma_q = 0.5;
    std::size_t arms = 2;
    double sigma_0 = 0.1;
};

/// theta_0 ~ N(mu_0, precision_0^-1); each task draws theta ~ N(theta_0, task_covariance).
struct LinearGaussianMetaPrior {
    Vector mu_0;
    Matrix precision_0;
    Matrix task_covariance;
    Matrix features;  // K x d
};

using MetaPrior = std::variant<CategoricalMetaPrior, GaussianDiagMetaPrior, LinearGaussianMetaPrior>;

void validate(const MetaPrior& meta);
Family family_of(const MetaPrior& meta);

// ---------------------------------------------------------------------------

struct BanditInstance {
    Family family = Family::kGaussian;
    Vector theta;          // true arm means
    double noise_sigma = 0.0;
    Vector latent;         // linear family: the parameter vector theta_t

    std::size_t arms() const { return static_cast<std::size_t>(theta.size()); }
};

/// P* ~ Q.
InstancePrior sample_instance_prior(const MetaPrior& meta, RngStream& stream);

/// theta_{s,*} ~ P*. `noise_sigma` is the reward noise of the Gaussian and
/// linear families and is ignored for Bernoulli instances.
BanditInstance sample_task_instance(const InstancePrior& prior, double noise_sigma,
                                    RngStream& stream);

/// One reward draw for `arm`: Ber(theta_arm) or N(theta_arm, sigma^2).
double sample_reward(const BanditInstance& instance, std::size_t arm, RngStream& stream);

/// (argmax arm, its mean); ties go to the lowest index.
std::pair<std::size_t, double> optimal_arm(const BanditInstance& instance);

/// K x d feature matrix with entries uniform on [-0.5, 0.5].
Matrix sample_arm_features(RngStream& stream, std::size_t arms, std::size_t dim);

}  // namespace metats
