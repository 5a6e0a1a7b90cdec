#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "metats/environment.hpp"
#include "metats/meta_posterior.hpp"
#include "metats/posterior.hpp"
#include "metats/rng.hpp"

namespace metats {

enum class AgentKind { kMetaTS, kOracleTS, kAgnosticTS };

std::string_view to_string(AgentKind kind);

struct AgentSpec {
    AgentKind kind = AgentKind::kMetaTS;
    std::string label = "MetaTS";
    std::optional<MetaPrior> meta_prior;               // MetaTS
    std::optional<InstancePrior> true_instance_prior;  // OracleTS
    std::optional<InstancePrior> agnostic_prior;       // AgnosticTS
    bool forced_last_k = false;
    /// Multiplies sigma_q in the agent's believed meta-prior (MetaTS only).
    double misspecification_scale = 1.0;
    /// Known reward noise of the Gaussian and linear families.
    double noise_sigma = 1.0;
    LinearUpdate linear_update = LinearUpdate::kWoodbury;

    /// Throws DomainError unless exactly the prior relevant to `kind` is set
    /// and the scale is positive.
    void validate() const;
};

/// Prior used by agnostic TS: the marginal N(0, (sigma_q^2 + sigma_0^2) I)
/// of theta for the Gaussian family (in parameter space for the linear
/// family), and the uninformative prod_i Beta(1, 1) for the Bernoulli family.
InstancePrior agnostic_prior(const MetaPrior& meta);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_lowest(const Vector& values);

/// Thompson sampling agent run as a per-task state machine:
/// begin_task, then n rounds of select_action / observe, then end_task.
class Agent {
public:
    explicit Agent(AgentSpec spec);

    /// Chooses the task prior P_s and resets the task posterior.
    void begin_task(RngStream& stream, std::size_t horizon);
    std::size_t select_action(RngStream& stream);
    void observe(std::size_t arm, double reward);
    /// MetaTS folds the completed task log into its meta-posterior.
    void end_task();

    const AgentSpec& spec() const { return spec_; }
    const std::optional<MetaPosterior>& meta() const { return meta_; }
    const std::optional<InstancePrior>& current_task_prior() const { return task_prior_; }
    const TaskPosterior& task_posterior() const { return *posterior_; }
    const TaskLog& task_log() const { return log_; }
    /// 1-based round index within the current task.
    std::size_t round() const { return round_; }
    /// 1-based index of the current (or next) task.
    std::size_t task() const { return task_; }
    bool in_task() const { return in_task_; }

private:
    AgentSpec spec_;
    std::optional<MetaPosterior> meta_;
    std::optional<InstancePrior> task_prior_;
    std::optional<TaskPosterior> posterior_;
    TaskLog log_;
    std::size_t horizon_ = 0;
    std::size_t round_ = 1;
    std::size_t task_ = 1;
    bool in_task_ = false;
    std::optional<std::size_t> pending_arm_;
};

}  // namespace metats
