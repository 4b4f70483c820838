#pragma once
// Episodic decision process for reconfiguration.
//
// An episode opens T edges one at a time starting from the all-closed mesh.
// Intermediate steps pay zero; the terminal step checks the all-node-traversing
// constraint, then the rank-based radiality constraint (in that order), and
// pays -penalty on violation or -ACP/scale on a feasible configuration.

#include <cstdint>
#include <optional>
#include <vector>

#include "gridconf/grid_model.hpp"
#include "gridconf/reliability.hpp"
#include "gridconf/topology.hpp"

namespace gridconf {

enum class Violation { none, traversal, radiality };

struct RewardOutcome {
    double reward = 0.0;
    bool feasible = false;
    std::optional<double> acp;  // MWh/yr, present iff feasible at terminal
    Violation violated = Violation::none;
};

struct EnvState {
    std::vector<std::uint8_t> status;  // per branch id-1: 1 = closed, 0 = open
    int step_index = 0;

    std::vector<int> open_edges() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(status.size()); ++i)
            if (!status[static_cast<size_t>(i)]) out.push_back(i + 1);
        return out;
    }

    /// Status vector as reals, the Q-network input encoding.
    std::vector<double> encode() const {
        return std::vector<double>(status.begin(), status.end());
    }
};

struct EnvParams {
    double penalty = 100.0;
    double reward_scale = 1.0;  // feasible reward = -acp / reward_scale
};

/// Default reward scale: ACP of the base (all ties open) configuration / 50,
/// placing feasible rewards around [-50, 0].
inline double default_reward_scale(const Network& net, const ReliabilityModel& model) {
    return average_curtailed_power(net, model, base_configuration(net)) / 50.0;
}

/// Terminal evaluation of a complete open set. Traversal is checked before
/// radiality. Feasible rewards decrease strictly with ACP.
inline RewardOutcome terminal_reward(const Network& net, const ReliabilityModel& model,
                                     const Configuration& cfg, const EnvParams& params) {
    RewardOutcome out;
    if (!all_nodes_traversed(net, cfg)) {
        out.reward = -params.penalty;
        out.violated = Violation::traversal;
        return out;
    }
    if (!is_radial(net, cfg)) {
        out.reward = -params.penalty;
        out.violated = Violation::radiality;
        return out;
    }
    out.feasible = true;
    out.acp = average_curtailed_power(net, model, cfg);
    out.reward = -*out.acp / params.reward_scale;
    return out;
}

class GridEnv {
public:
    GridEnv(const Network& net, const ReliabilityModel& model, EnvParams params)
        : net_(net), model_(model), params_(params), horizon_(net.tie_count()) {}

    int horizon() const { return horizon_; }
    const EnvParams& params() const { return params_; }

    EnvState reset() {
        state_.status.assign(static_cast<size_t>(net_.branch_count()), 1);
        state_.step_index = 0;
        return state_;
    }

    const EnvState& state() const { return state_; }

    /// Currently closed edges; the action mask.
    std::vector<int> valid_actions() const {
        std::vector<int> out;
        for (int i = 0; i < static_cast<int>(state_.status.size()); ++i)
            if (state_.status[static_cast<size_t>(i)]) out.push_back(i + 1);
        return out;
    }

    struct StepResult {
        EnvState state;
        RewardOutcome outcome;
        bool terminal = false;
    };

    /// Opens one edge. The masking contract makes re-opening unreachable; it
    /// throws if violated anyway.
    StepResult step(int branch_id) {
        if (branch_id < 1 || branch_id > net_.branch_count())
            throw InvalidActionError("unknown branch id " + std::to_string(branch_id));
        auto& bit = state_.status[static_cast<size_t>(branch_id - 1)];
        if (!bit)
            throw InvalidActionError("branch " + std::to_string(branch_id) + " is already open");
        bit = 0;
        ++state_.step_index;

        StepResult res;
        res.terminal = state_.step_index == horizon_;
        if (res.terminal)
            res.outcome = terminal_reward(net_, model_, Configuration(state_.open_edges()),
                                          params_);
        res.state = state_;
        return res;
    }

private:
    const Network& net_;
    const ReliabilityModel& model_;
    EnvParams params_;
    int horizon_;
    EnvState state_;
};

}  // namespace gridconf
