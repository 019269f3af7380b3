#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "controllers.hpp"
#include "episode.hpp"
#include "errors.hpp"
#include "qnet.hpp"
#include "rng.hpp"
#include "signal.hpp"
#include "sim.hpp"

namespace tsc {

struct Transition {
    StateVector s{};
    Phase a = Phase::ns_through;
    int reward = 0;
    StateVector s_next{};
    int elapsed_steps = 1; // simulation steps between s and s_next
};

/// Fixed-capacity ring buffer of transitions; the oldest entry is
/// overwritten once full.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity = 10000) : capacity_(capacity) {
        if (capacity == 0) throw ConfigError("agent.memory_capacity", "must be positive");
        items_.reserve(std::min<std::size_t>(capacity, 1u << 16));
    }

    void store(const Transition& t) {
        if (items_.size() < capacity_) {
            items_.push_back(t);
        } else {
            items_[cursor_] = t;
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    /// Slot the next store writes to.
    std::size_t cursor() const noexcept { return cursor_; }
    const Transition& operator[](std::size_t i) const { return items_.at(i); }

    /// Uniform sampling with replacement; returns slot indices.
    std::vector<std::size_t> sample_indices(Rng& rng, std::size_t batch) const {
        if (items_.size() < batch)
            throw std::logic_error("replay memory holds " + std::to_string(items_.size()) + " < " +
                                   std::to_string(batch) + " transitions");
        std::vector<std::size_t> idx(batch);
        for (auto& i : idx) i = static_cast<std::size_t>(rng.below(items_.size()));
        return idx;
    }

    Minibatch sample_batch(Rng& rng, std::size_t batch) const {
        const auto idx = sample_indices(rng, batch);
        const auto n = static_cast<Eigen::Index>(batch);
        Minibatch mb{Eigen::MatrixXd(kNumLanes, n), std::vector<int>(batch), Eigen::VectorXd(n),
                     Eigen::MatrixXd(kNumLanes, n), Eigen::VectorXd(n)};
        for (Eigen::Index j = 0; j < n; ++j) {
            const Transition& t = items_[idx[static_cast<std::size_t>(j)]];
            for (std::size_t k = 0; k < kNumLanes; ++k) {
                mb.states(static_cast<Eigen::Index>(k), j) = t.s[k];
                mb.next_states(static_cast<Eigen::Index>(k), j) = t.s_next[k];
            }
            mb.actions[static_cast<std::size_t>(j)] = static_cast<int>(phase_index(t.a));
            mb.rewards(j) = t.reward;
            mb.elapsed(j) = t.elapsed_steps;
        }
        return mb;
    }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> items_;
};

/// Linear decay from `start` to `end` over `decay_steps` training steps,
/// constant afterwards.
struct EpsilonSchedule {
    double start = 0.9;
    double end = 0.05;
    std::int64_t decay_steps = 15000;

    double at(std::int64_t t) const noexcept {
        if (t <= 0) return start;
        if (t >= decay_steps) return end;
        return start + (end - start) * static_cast<double>(t) / static_cast<double>(decay_steps);
    }
};

/// Time unit of the discount factor. `simulation_step` discounts each
/// transition by gamma^(steps it spans); `decision` once per transition.
enum class DiscountUnit { simulation_step, decision };

struct AgentConfig {
    double gamma = 0.999;
    DiscountUnit discount_unit = DiscountUnit::simulation_step;
    std::size_t batch_size = 128;
    std::size_t memory_capacity = 10000;
    EpsilonSchedule epsilon;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::vector<int> hidden{64, 64};

    std::vector<int> architecture() const {
        std::vector<int> a{static_cast<int>(kNumLanes)};
        a.insert(a.end(), hidden.begin(), hidden.end());
        a.push_back(static_cast<int>(kNumPhases));
        return a;
    }

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("agent.gamma", "must lie in (0, 1)");
        if (batch_size == 0) throw ConfigError("agent.batch_size", "must be positive");
        if (memory_capacity < batch_size) throw ConfigError("agent.memory_capacity", "must be at least batch_size");
        if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0)) throw ConfigError("agent.epsilon_start", "must lie in [0, 1]");
        if (!(epsilon.end >= 0.0 && epsilon.end <= epsilon.start))
            throw ConfigError("agent.epsilon_end", "must lie in [0, epsilon_start]");
        if (epsilon.decay_steps < 1) throw ConfigError("agent.epsilon_decay_steps", "must be positive");
        if (!(learning_rate > 0.0)) throw ConfigError("agent.learning_rate", "must be positive");
        if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("agent.momentum", "must lie in [0, 1)");
        for (int h : hidden)
            if (h <= 0) throw ConfigError("agent.hidden", "layer sizes must be positive");
    }
};

/// Argmax with ties to the lowest index.
inline Phase greedy_action(const Eigen::VectorXd& q) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (q(i) > q(best)) best = i;
    return phase_at(static_cast<std::size_t>(best));
}

/// Epsilon-greedy over the eight phases. The exploration draw is always
/// taken so the generator advances identically for any epsilon.
inline Phase select_action(const Eigen::VectorXd& q, double epsilon, Rng& rng) {
    if (rng.uniform() < epsilon) return phase_at(static_cast<std::size_t>(rng.below(kNumPhases)));
    return greedy_action(q);
}

/// Positive when the total halting count fell between decisions.
constexpr int compute_reward(int queue_now, int queue_next) noexcept { return queue_now - queue_next; }

/// Online/target networks, optimizer, replay memory and exploration state.
class DqnAgent {
public:
    DqnAgent(AgentConfig cfg, std::uint64_t seed)
        : cfg_(std::move(cfg)),
          online_(init_network(cfg_.architecture(), split_seed(seed, kStreamInit))),
          target_(copy_into_target(online_)),
          optimizer_{cfg_.learning_rate, cfg_.momentum, {}},
          memory_(cfg_.memory_capacity),
          rng_(split_seed(seed, kStreamAgent)) {
        cfg_.validate();
    }

    const AgentConfig& config() const noexcept { return cfg_; }
    const NetworkParams& online() const noexcept { return online_; }
    const NetworkParams& target() const noexcept { return target_; }
    const ReplayMemory& memory() const noexcept { return memory_; }
    std::int64_t training_steps() const noexcept { return steps_; }
    double epsilon() const noexcept { return cfg_.epsilon.at(steps_); }

    /// Exploration probability override (e.g. forced exploration in tests).
    void force_epsilon(std::optional<double> eps) { forced_eps_ = eps; }

    /// Chooses an action and advances the training-step counter.
    Phase act(const StateVector& s) {
        const double eps = forced_eps_.value_or(epsilon());
        const Phase a = select_action(forward(online_, s), eps, rng_);
        ++steps_;
        return a;
    }

    void remember(const Transition& t) { memory_.store(t); }

    /// One gradient step on a sampled minibatch once the memory holds a batch.
    std::optional<double> learn() {
        if (memory_.size() < cfg_.batch_size) return std::nullopt;
        Minibatch batch = memory_.sample_batch(rng_, cfg_.batch_size);
        if (cfg_.discount_unit == DiscountUnit::decision) batch.elapsed.resize(0);
        const Eigen::VectorXd y = td_targets(online_, target_, batch, cfg_.gamma);
        const Gradients g = batch_gradients(online_, batch, y);
        sgd_momentum_step(online_, g, optimizer_);
        return g.loss;
    }

    void refresh_target() { target_ = copy_into_target(online_); }

private:
    AgentConfig cfg_;
    NetworkParams online_;
    NetworkParams target_;
    OptimizerState optimizer_;
    ReplayMemory memory_;
    Rng rng_;
    std::int64_t steps_ = 0;
    std::optional<double> forced_eps_;
};

struct DecisionOutcome {
    Transition transition;
    int queue_before = 0;
    int queue_after = 0;
    int steps = 0;
    std::optional<double> loss;
};

/// Observe, act, run the interval (yellow + green on a switch), observe,
/// store the transition and take one learning step.
inline DecisionOutcome decision_cycle(WorldState& w, SignalState& signal, DqnAgent& agent, const PatternSpec& pattern,
                                      std::int64_t horizon = kEpisodeSteps, EpisodeSinks sinks = {}) {
    DecisionOutcome out;
    const QueueCounts q0 = raw_queues(w);
    const StateVector s = normalize_queues(q0, w.params);
    const Phase a = agent.act(s);
    signal = apply_request(w, signal, {a, w.params.phase_span_steps()}, sinks.decisions);
    out.steps = run_until_decision(w, signal, pattern, horizon, sinks.trace);
    const QueueCounts q1 = raw_queues(w);
    out.queue_before = total_queue(q0);
    out.queue_after = total_queue(q1);
    out.transition = {s, a, compute_reward(out.queue_before, out.queue_after), normalize_queues(q1, w.params),
                      std::max(1, out.steps)};
    agent.remember(out.transition);
    out.loss = agent.learn();
    return out;
}

struct TrainingEpisode {
    EpisodeResult result;
    double mean_loss = 0.0; // 0 when no gradient step ran
    double epsilon_at_end = 0.0;
    std::vector<DecisionOutcome> decisions;
};

/// One episode of learning; the target network is refreshed at the end.
inline TrainingEpisode run_training_episode(DqnAgent& agent, const PatternSpec& pattern, std::uint64_t arrival_seed,
                                            const SimParams& params = {}, std::int64_t horizon = kEpisodeSteps,
                                            EpisodeSinks sinks = {}) {
    TrainingEpisode ep;
    WorldState w(params, arrival_seed);
    SignalState signal = SignalState::green(Phase::ns_through, 0);
    double loss_sum = 0.0;
    std::int64_t loss_n = 0;
    while (w.clock < horizon) {
        DecisionOutcome d = decision_cycle(w, signal, agent, pattern, horizon, sinks);
        if (d.loss) {
            loss_sum += *d.loss;
            ++loss_n;
        }
        ep.decisions.push_back(std::move(d));
    }
    agent.refresh_target();
    ep.result = episode_result(w);
    ep.mean_loss = loss_n > 0 ? loss_sum / static_cast<double>(loss_n) : 0.0;
    ep.epsilon_at_end = agent.epsilon();
    return ep;
}

/// Frozen policy wrapper for evaluation; greedy unless epsilon > 0.
class RlController final : public Controller {
public:
    explicit RlController(NetworkParams net, double epsilon = 0.0, std::uint64_t seed = 0)
        : net_(std::move(net)), epsilon_(epsilon), rng_(split_seed(seed, kStreamAgent)) {
        if (net_.input_size() != static_cast<int>(kNumLanes) || net_.output_size() != static_cast<int>(kNumPhases))
            throw ArchitectureMismatch("Q-network must map 12 queue inputs to 8 phase values");
    }

    std::string name() const override { return "rl"; }

    PhaseRequest decide(const WorldState& w, const SignalState&) override {
        const Eigen::VectorXd q = forward(net_, observe_state(w));
        const Phase a = epsilon_ > 0.0 ? select_action(q, epsilon_, rng_) : greedy_action(q);
        return {a, w.params.phase_span_steps()};
    }

private:
    NetworkParams net_;
    double epsilon_;
    Rng rng_;
};

} // namespace tsc
