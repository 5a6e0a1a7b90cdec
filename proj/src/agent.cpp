#include "metats/agent.hpp"

#include <cmath>

#include "metats/detail/overloaded.hpp"
#include "metats/errors.hpp"

namespace metats {

using detail::Overloaded;

std::string_view to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::kMetaTS: return "MetaTS";
        case AgentKind::kOracleTS: return "OracleTS";
        case AgentKind::kAgnosticTS: return "TS";
    }
    return "unknown";
}

void AgentSpec::validate() const {
    const bool want_meta = kind == AgentKind::kMetaTS;
    const bool want_oracle = kind == AgentKind::kOracleTS;
    const bool want_agnostic = kind == AgentKind::kAgnosticTS;
    if (meta_prior.has_value() != want_meta || true_instance_prior.has_value() != want_oracle ||
        agnostic_prior.has_value() != want_agnostic) {
        throw DomainError("AgentSpec '" + label + "': exactly the prior for its kind must be set");
    }
    if (!(misspecification_scale > 0.0)) {
        throw DomainError("AgentSpec '" + label + "': misspecification_scale must be positive");
    }
    if (!(noise_sigma > 0.0)) {
        throw DomainError("AgentSpec '" + label + "': noise_sigma must be positive");
    }
    if (meta_prior) metats::validate(*meta_prior);
    if (true_instance_prior) metats::validate(*true_instance_prior);
    if (agnostic_prior) metats::validate(*agnostic_prior);
}

InstancePrior agnostic_prior(const MetaPrior& meta) {
    return std::visit(
        Overloaded{
            [](const CategoricalMetaPrior& q) -> InstancePrior {
                const std::size_t k = q.priors.front().arms();
                return BetaProductPrior{std::vector<double>(k, 1.0), std::vector<double>(k, 1.0)};
            },
            [](const GaussianDiagMetaPrior& q) -> InstancePrior {
                const double width = std::sqrt(q.sigma_q * q.sigma_q + q.sigma_0 * q.sigma_0);
                return GaussianDiagPrior{Vector::Zero(static_cast<Eigen::Index>(q.arms)), width};
            },
            [](const LinearGaussianMetaPrior& q) -> InstancePrior {
                const auto d = q.mu_0.size();
                const Matrix meta_cov =
                    checked_cholesky(q.precision_0, "meta-prior precision").solve(Matrix::Identity(d, d));
                Matrix marginal = meta_cov + q.task_covariance;
                marginal = 0.5 * (marginal + marginal.transpose());
                return LinearGaussianPrior{q.mu_0, marginal, q.features};
            },
        },
        meta);
}

std::size_t argmax_lowest(const Vector& values) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<Eigen::Index>(best)]) {
            best = static_cast<std::size_t>(i);
        }
    }
    return best;
}

Agent::Agent(AgentSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    if (spec_.kind == AgentKind::kMetaTS) {
        meta_ = initial_meta_posterior(*spec_.meta_prior, spec_.noise_sigma,
                                       spec_.misspecification_scale);
    }
}

void Agent::begin_task(RngStream& stream, std::size_t horizon) {
    if (in_task_) {
        throw ContractViolation("begin_task: previous task has not been finalized");
    }
    if (horizon == 0) {
        throw DomainError("begin_task: horizon must be positive");
    }
    switch (spec_.kind) {
        case AgentKind::kMetaTS:
            task_prior_ = sample_meta_posterior(*meta_, stream);
            break;
        case AgentKind::kOracleTS:
            task_prior_ = *spec_.true_instance_prior;
            break;
        case AgentKind::kAgnosticTS:
            task_prior_ = *spec_.agnostic_prior;
            break;
    }
    posterior_ = init_task_posterior(*task_prior_, spec_.noise_sigma);
    log_ = TaskLog(arms(*task_prior_));
    horizon_ = horizon;
    round_ = 1;
    in_task_ = true;
    pending_arm_.reset();
}

std::size_t Agent::select_action(RngStream& stream) {
    if (!in_task_ || round_ > horizon_) {
        throw ContractViolation("select_action: no round left in the current task");
    }
    const std::size_t k = arms(*posterior_);
    std::size_t arm;
    if (spec_.forced_last_k && round_ + k > horizon_) {
        // Last K rounds pull arms 1..K in order.
        arm = round_ + k - horizon_ - 1;
    } else {
        arm = argmax_lowest(sample_task_posterior(*posterior_, stream));
    }
    pending_arm_ = arm;
    return arm;
}

void Agent::observe(std::size_t arm, double reward) {
    if (!pending_arm_ || *pending_arm_ != arm) {
        throw ContractViolation("observe: arm does not match the most recent selection");
    }
    update_task_posterior(*posterior_, arm, reward);
    log_.record(arm, reward);
    pending_arm_.reset();
    ++round_;
}

void Agent::end_task() {
    if (!in_task_ || round_ <= horizon_) {
        throw ContractViolation("end_task: task has rounds remaining");
    }
    if (meta_) {
        meta_ = update_meta_posterior(*meta_, log_, spec_.linear_update);
    }
    in_task_ = false;
    ++task_;
}

}  // namespace metats
