#pragma once
// From-scratch deep Q-learning: a dense MLP value function, masked
// epsilon-greedy action selection, and online per-transition SGD against a
// periodically synced target network.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridconf/env.hpp"
#include "gridconf/errors.hpp"
#include "gridconf/grid_model.hpp"
#include "gridconf/reliability.hpp"
#include "gridconf/rng.hpp"

namespace gridconf {

enum class Activation { relu, leaky_relu, tanh_ };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::tanh_: return "tanh";
    }
    throw ValidationError("unknown activation");
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "tanh") return Activation::tanh_;
    throw ValidationError("unknown activation '" + s + "'");
}

/// Dense MLP. weights[l] is row-major (layer_sizes[l+1] x layer_sizes[l]);
/// hidden layers use `activation`, the output layer is linear.
struct QFunction {
    std::vector<int> layer_sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    Activation activation = Activation::leaky_relu;
    double leak = 0.1;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

namespace detail {

inline double activate(double z, Activation a, double leak) {
    switch (a) {
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::leaky_relu: return z > 0.0 ? z : leak * z;
        case Activation::tanh_: return std::tanh(z);
    }
    throw ValidationError("unknown activation");
}

/// Derivative expressed through the post-activation value.
inline double activate_grad(double a_val, Activation a, double leak) {
    switch (a) {
        case Activation::relu: return a_val > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return a_val > 0.0 ? 1.0 : leak;
        case Activation::tanh_: return 1.0 - a_val * a_val;
    }
    throw ValidationError("unknown activation");
}

/// Post-activation values for every layer, acts[0] being the input.
inline std::vector<std::vector<double>> forward_activations(const QFunction& q,
                                                            const std::vector<double>& input) {
    if (static_cast<int>(input.size()) != q.input_size())
        throw ValidationError("input size " + std::to_string(input.size()) + " does not match network input " +
                              std::to_string(q.input_size()));
    std::vector<std::vector<double>> acts;
    acts.reserve(q.weights.size() + 1);
    acts.push_back(input);
    for (int l = 0; l < q.layer_count(); ++l) {
        const int fan_in = q.layer_sizes[static_cast<size_t>(l)];
        const int fan_out = q.layer_sizes[static_cast<size_t>(l) + 1];
        const auto& w = q.weights[static_cast<size_t>(l)];
        const auto& b = q.biases[static_cast<size_t>(l)];
        const auto& prev = acts.back();
        std::vector<double> next(static_cast<size_t>(fan_out));
        const bool last = l == q.layer_count() - 1;
        for (int o = 0; o < fan_out; ++o) {
            double z = b[static_cast<size_t>(o)];
            const double* wrow = w.data() + static_cast<size_t>(o) * static_cast<size_t>(fan_in);
            for (int i = 0; i < fan_in; ++i) z += wrow[i] * prev[static_cast<size_t>(i)];
            next[static_cast<size_t>(o)] = last ? z : activate(z, q.activation, q.leak);
        }
        acts.push_back(std::move(next));
    }
    return acts;
}

}  // namespace detail

/// Glorot-uniform weights, zero biases. Draw order is fixed (layer by layer,
/// row by row) so a seed pins the initial parameters exactly.
inline QFunction make_qfunction(std::vector<int> layer_sizes, Activation activation, double leak,
                                Rng& rng) {
    if (layer_sizes.size() < 2) throw ValidationError("network needs at least input and output layers");
    for (int n : layer_sizes)
        if (n < 1) throw ValidationError("layer sizes must be positive");
    QFunction q;
    q.layer_sizes = std::move(layer_sizes);
    q.activation = activation;
    q.leak = leak;
    for (size_t l = 0; l + 1 < q.layer_sizes.size(); ++l) {
        const int fan_in = q.layer_sizes[l];
        const int fan_out = q.layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::vector<double> w(static_cast<size_t>(fan_in) * static_cast<size_t>(fan_out));
        for (auto& v : w) v = rng.uniform(-limit, limit);
        q.weights.push_back(std::move(w));
        q.biases.emplace_back(static_cast<size_t>(fan_out), 0.0);
    }
    return q;
}

/// Q-values for one state. Throws NumericError if the output is non-finite.
inline std::vector<double> forward(const QFunction& q, const std::vector<double>& input) {
    auto acts = detail::forward_activations(q, input);
    for (double v : acts.back())
        if (!std::isfinite(v)) throw NumericError("non-finite value in forward pass");
    return acts.back();
}

/// Masked epsilon-greedy pick over branch ids. Greedy ties resolve to the
/// lowest id. Exactly one uniform draw, plus one more when exploring.
inline int select_action(const std::vector<double>& qvals, const std::vector<int>& valid,
                         double epsilon, Rng& rng) {
    if (valid.empty()) throw InvalidActionError("no valid actions to select from");
    if (rng.uniform01() < epsilon)
        return valid[static_cast<size_t>(rng.uniform_int(static_cast<int>(valid.size())))];
    int best = valid.front();
    double best_q = qvals.at(static_cast<size_t>(best - 1));
    for (size_t i = 1; i < valid.size(); ++i) {
        const double v = qvals.at(static_cast<size_t>(valid[i] - 1));
        if (v > best_q) {
            best_q = v;
            best = valid[i];
        }
    }
    return best;
}

/// Linear-gap decay toward the floor: each episode removes 1/horizon of the
/// remaining gap, so epsilon after k updates is
/// floor + (1 - floor) * (1 - 1/horizon)^k.
struct EpsilonSchedule {
    double value = 1.0;
    double floor = 0.01;
    int horizon = 1;
};

inline EpsilonSchedule update_epsilon(EpsilonSchedule s) {
    s.value -= (s.value - s.floor) / s.horizon;
    return s;
}

inline double epsilon_after(double floor, int horizon, int k) {
    return floor + (1.0 - floor) * std::pow(1.0 - 1.0 / horizon, k);
}

/// One-step TD target. `sign` is +1 for the standard Bellman backup and -1
/// to subtract the successor value instead.
inline double bellman_target(double reward, bool terminal, const QFunction& target_q,
                             const std::vector<double>& next_state,
                             const std::vector<int>& next_valid, double gamma, int sign) {
    if (terminal) return reward;
    if (next_valid.empty()) throw InvalidActionError("non-terminal state has no valid actions");
    const auto qv = forward(target_q, next_state);
    double best = qv.at(static_cast<size_t>(next_valid.front() - 1));
    for (size_t i = 1; i < next_valid.size(); ++i)
        best = std::max(best, qv.at(static_cast<size_t>(next_valid[i] - 1)));
    return reward + sign * gamma * best;
}

inline double mse_loss(double predicted, double target) {
    const double d = predicted - target;
    return d * d;
}

/// Per-parameter gradients, same shapes as the QFunction they came from.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    double loss = 0.0;
};

/// Backprop of (Q(state)[output_index] - target)^2 through the network.
inline Gradients compute_gradients(const QFunction& q, const std::vector<double>& state,
                                   int output_index, double target) {
    if (output_index < 0 || output_index >= q.output_size())
        throw ValidationError("output index out of range");
    const auto acts = detail::forward_activations(q, state);
    Gradients g;
    g.weights.resize(q.weights.size());
    g.biases.resize(q.biases.size());

    const double pred = acts.back()[static_cast<size_t>(output_index)];
    g.loss = mse_loss(pred, target);

    // delta holds dL/dz for the current layer; the output layer is linear so
    // only the chosen unit carries gradient.
    std::vector<double> delta(acts.back().size(), 0.0);
    delta[static_cast<size_t>(output_index)] = 2.0 * (pred - target);

    for (int l = q.layer_count() - 1; l >= 0; --l) {
        const int fan_in = q.layer_sizes[static_cast<size_t>(l)];
        const int fan_out = q.layer_sizes[static_cast<size_t>(l) + 1];
        const auto& below = acts[static_cast<size_t>(l)];
        auto& gw = g.weights[static_cast<size_t>(l)];
        auto& gb = g.biases[static_cast<size_t>(l)];
        gw.assign(static_cast<size_t>(fan_in) * static_cast<size_t>(fan_out), 0.0);
        gb.assign(static_cast<size_t>(fan_out), 0.0);
        std::vector<double> delta_below(static_cast<size_t>(fan_in), 0.0);
        const auto& w = q.weights[static_cast<size_t>(l)];
        for (int o = 0; o < fan_out; ++o) {
            const double d = delta[static_cast<size_t>(o)];
            if (d == 0.0) continue;
            gb[static_cast<size_t>(o)] = d;
            double* gwrow = gw.data() + static_cast<size_t>(o) * static_cast<size_t>(fan_in);
            const double* wrow = w.data() + static_cast<size_t>(o) * static_cast<size_t>(fan_in);
            for (int i = 0; i < fan_in; ++i) {
                gwrow[i] = d * below[static_cast<size_t>(i)];
                delta_below[static_cast<size_t>(i)] += d * wrow[i];
            }
        }
        if (l > 0) {
            for (int i = 0; i < fan_in; ++i)
                delta_below[static_cast<size_t>(i)] *=
                    detail::activate_grad(below[static_cast<size_t>(i)], q.activation, q.leak);
            delta = std::move(delta_below);
        }
    }
    return g;
}

/// In-place SGD update. Throws NumericError if any parameter goes non-finite.
inline void apply_gradients(QFunction& q, const Gradients& g, double alpha) {
    for (size_t l = 0; l < q.weights.size(); ++l) {
        auto& w = q.weights[l];
        const auto& gw = g.weights[l];
        for (size_t i = 0; i < w.size(); ++i) {
            w[i] -= alpha * gw[i];
            if (!std::isfinite(w[i])) throw NumericError("non-finite weight after update");
        }
        auto& b = q.biases[l];
        const auto& gb = g.biases[l];
        for (size_t i = 0; i < b.size(); ++i) {
            b[i] -= alpha * gb[i];
            if (!std::isfinite(b[i])) throw NumericError("non-finite bias after update");
        }
    }
}

/// One transition's SGD step; returns the pre-update loss.
inline double sgd_step(QFunction& q, const std::vector<double>& state, int output_index,
                       double target, double alpha) {
    const auto g = compute_gradients(q, state, output_index, target);
    apply_gradients(q, g, alpha);
    return g.loss;
}

/// One environment transition. `action` is a branch id; next_valid is empty
/// exactly when the transition is terminal.
struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    bool terminal = false;
    std::vector<double> next_state;
    std::vector<int> next_valid;
};

/// Online update over an episode's transitions, in step order, each against
/// the frozen target network. Returns the mean per-transition loss.
inline double backprop_update(QFunction& q, const QFunction& target_q,
                              const std::vector<Transition>& transitions, double gamma,
                              double alpha, int sign) {
    if (transitions.empty()) return 0.0;
    double total = 0.0;
    for (const auto& t : transitions) {
        const double y =
            bellman_target(t.reward, t.terminal, target_q, t.next_state, t.next_valid, gamma, sign);
        total += sgd_step(q, t.state, t.action - 1, y, alpha);
    }
    return total / static_cast<double>(transitions.size());
}

struct TrainConfig {
    int episodes = 10000;
    double alpha = 1e-4;
    double gamma = 0.9;
    double epsilon_min = 0.01;
    std::vector<int> hidden;  // empty: two hidden layers of width 2 * |branches|
    int sync_interval = 50;
    std::uint64_t seed = 1;
    double penalty = 100.0;
    std::optional<double> reward_scale;  // unset: base-configuration ACP / 50
    int target_sign = 1;
    Activation activation = Activation::leaky_relu;
    double leak = 0.1;

    void validate() const {
        if (episodes < 1) throw ValidationError("episodes must be >= 1");
        if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
        if (gamma < 0.0 || gamma > 1.0) throw ValidationError("gamma must be in [0, 1]");
        if (epsilon_min < 0.0 || epsilon_min > 1.0)
            throw ValidationError("epsilon_min must be in [0, 1]");
        if (sync_interval < 1) throw ValidationError("sync_interval must be >= 1");
        if (!(penalty > 0.0)) throw ValidationError("penalty must be positive");
        if (reward_scale && !(*reward_scale > 0.0))
            throw ValidationError("reward_scale must be positive");
        if (target_sign != 1 && target_sign != -1)
            throw ValidationError("target_sign must be +1 or -1");
        for (int h : hidden)
            if (h < 1) throw ValidationError("hidden layer sizes must be positive");
    }
};

struct EpisodeRecord {
    int episode = 0;        // zero-based
    double reward = 0.0;    // terminal reward; intermediate steps pay zero
    double mse = 0.0;       // mean per-transition loss of this episode's updates
    std::optional<double> acp;
    std::vector<int> open_edges;
    double epsilon = 1.0;   // exploration rate used during this episode
};

struct TrainResult {
    QFunction q;
    std::vector<EpisodeRecord> episodes;
    double reward_scale = 1.0;
};

/// Called after each episode's update with the fresh record and both nets.
using EpisodeObserver =
    std::function<void(const EpisodeRecord&, const QFunction& q, const QFunction& target_q)>;

/// Full training loop: episode rollout with masked epsilon-greedy actions,
/// per-transition online SGD in step order, target sync every sync_interval
/// episodes, epsilon decayed once per episode.
inline TrainResult train(const Network& net, const ReliabilityModel& model, const TrainConfig& cfg,
                         const EpisodeObserver& observer = {}) {
    cfg.validate();
    const int n_edges = net.branch_count();
    const double scale = cfg.reward_scale ? *cfg.reward_scale : default_reward_scale(net, model);
    GridEnv env(net, model, EnvParams{cfg.penalty, scale});

    std::vector<int> layers;
    layers.push_back(n_edges);
    if (cfg.hidden.empty()) {
        layers.push_back(2 * n_edges);
        layers.push_back(2 * n_edges);
    } else {
        layers.insert(layers.end(), cfg.hidden.begin(), cfg.hidden.end());
    }
    layers.push_back(n_edges);

    Rng rng(cfg.seed);
    TrainResult result;
    result.q = make_qfunction(layers, cfg.activation, cfg.leak, rng);
    result.reward_scale = scale;
    QFunction target_q = result.q;

    EpsilonSchedule eps{1.0, cfg.epsilon_min, cfg.episodes};
    result.episodes.reserve(static_cast<size_t>(cfg.episodes));
    std::vector<Transition> transitions;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        EnvState state = env.reset();
        transitions.clear();
        RewardOutcome final_outcome;
        for (int t = 0; t < env.horizon(); ++t) {
            const auto valid = env.valid_actions();
            const auto encoded = state.encode();
            const auto qv = forward(result.q, encoded);
            const int action = select_action(qv, valid, eps.value, rng);
            auto res = env.step(action);
            Transition tr;
            tr.state = encoded;
            tr.action = action;
            tr.reward = res.outcome.reward;
            tr.terminal = res.terminal;
            if (!res.terminal) {
                tr.next_state = res.state.encode();
                tr.next_valid = env.valid_actions();
            }
            state = std::move(res.state);
            if (res.terminal) final_outcome = res.outcome;
            transitions.push_back(std::move(tr));
        }

        double mean_mse = 0.0;
        try {
            mean_mse = backprop_update(result.q, target_q, transitions, cfg.gamma, cfg.alpha,
                                       cfg.target_sign);
        } catch (const NumericError& e) {
            throw NumericError("episode " + std::to_string(ep) + ": " + e.what());
        }

        EpisodeRecord rec;
        rec.episode = ep;
        rec.reward = final_outcome.reward;
        rec.mse = mean_mse;
        rec.acp = final_outcome.acp;
        rec.open_edges = state.open_edges();
        rec.epsilon = eps.value;
        result.episodes.push_back(std::move(rec));

        eps = update_epsilon(eps);
        if ((ep + 1) % cfg.sync_interval == 0) target_q = result.q;
        if (observer) observer(result.episodes.back(), result.q, target_q);
    }
    return result;
}

/// Lowest-ACP feasible episode; later episodes win exact ties. Throws
/// NotFoundError when no episode reached a feasible configuration.
inline std::pair<Configuration, double> best_configuration(
    const std::vector<EpisodeRecord>& episodes) {
    const EpisodeRecord* best = nullptr;
    for (const auto& rec : episodes) {
        if (!rec.acp) continue;
        if (!best || *rec.acp <= *best->acp) best = &rec;
    }
    if (!best) throw NotFoundError("no feasible episode recorded");
    return {Configuration(best->open_edges), *best->acp};
}

/// Greedy (epsilon = 0) rollout of a trained network; ties go to the lowest
/// branch id, so the result is deterministic.
inline std::pair<Configuration, RewardOutcome> greedy_rollout(const Network& net,
                                                              const ReliabilityModel& model,
                                                              const EnvParams& params,
                                                              const QFunction& q) {
    GridEnv env(net, model, params);
    EnvState state = env.reset();
    RewardOutcome outcome;
    Rng rng(0);  // epsilon = 0 always takes the greedy branch
    for (int t = 0; t < env.horizon(); ++t) {
        const auto qv = forward(q, state.encode());
        const int action = select_action(qv, env.valid_actions(), 0.0, rng);
        auto res = env.step(action);
        state = std::move(res.state);
        if (res.terminal) outcome = res.outcome;
    }
    return {Configuration(state.open_edges()), outcome};
}

}  // namespace gridconf
