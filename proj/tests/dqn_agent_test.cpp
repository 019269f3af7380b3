#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include <tsc/dqn.hpp>

#include "oracles.hpp"

using namespace tsc;

namespace {

Transition numbered(int i) {
    Transition t;
    t.reward = i;
    return t;
}

AgentConfig small_config() {
    AgentConfig c;
    c.batch_size = 16;
    c.memory_capacity = 500;
    return c;
}

} // namespace

TEST(SelectAction, GreedyAtZeroEpsilon) {
    Rng rng(1);
    Eigen::VectorXd q(8);
    q << 0.1, 0.5, -2, 0.7, 0.3, 0.7, 0, 0;
    for (int i = 0; i < 100; ++i) EXPECT_EQ(select_action(q, 0.0, rng), Phase::ew_left);
}

TEST(SelectAction, UniformAtFullEpsilon) {
    Rng rng(2);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(8);
    q(2) = 100;
    std::vector<std::int64_t> counts(8, 0);
    for (int i = 0; i < 100000; ++i) ++counts[phase_index(select_action(q, 1.0, rng))];
    // chi-square critical value, 7 degrees of freedom, 0.01 significance
    EXPECT_LT(oracle::chi_square_uniform(counts), 18.475);
}

TEST(SelectAction, ShiftInvariant) {
    Rng rng(3), r1(0), r2(0);
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd q(8);
        for (int i = 0; i < 8; ++i) q(i) = rng.uniform();
        const double c = 10 * rng.uniform() - 5;
        EXPECT_EQ(select_action(q, 0.0, r1), select_action((q.array() + c).matrix(), 0.0, r2));
    }
}

TEST(Reward, QueueDifference) {
    static_assert(compute_reward(10, 7) == 3);
    EXPECT_EQ(compute_reward(4, 4), 0);
    EXPECT_EQ(compute_reward(0, 5), -5);
}

TEST(EpsilonSchedule, LinearThenFlat) {
    const EpsilonSchedule e;
    EXPECT_DOUBLE_EQ(e.at(0), 0.9);
    EXPECT_DOUBLE_EQ(e.at(7500), 0.475);
    EXPECT_DOUBLE_EQ(e.at(15000), 0.05);
    EXPECT_DOUBLE_EQ(e.at(40000), 0.05);
}

TEST(ReplayMemory, RingDropsOldest) {
    ReplayMemory m(10000);
    for (int i = 0; i < 10001; ++i) m.store(numbered(i));
    EXPECT_EQ(m.size(), 10000u);
    EXPECT_EQ(m[0].reward, 10000);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NE(m[i].reward, 0);
    EXPECT_EQ(m.cursor(), 1u);
}

TEST(ReplayMemory, UniformSamplingFrequency) {
    const std::size_t b = 32;
    ReplayMemory m(100);
    for (std::size_t i = 0; i < b; ++i) m.store(numbered(static_cast<int>(i)));
    Rng rng(9);
    std::vector<std::int64_t> counts(b, 0);
    const int draws = 5000;
    for (int d = 0; d < draws; ++d)
        for (auto i : m.sample_indices(rng, b)) ++counts[i];
    // Each slot expected draws * B / B times per batch of B.
    EXPECT_LT(oracle::chi_square_uniform(counts), 61.098); // 31 dof, p = 0.01
}

TEST(ReplayMemory, UnderfilledSamplingThrows) {
    ReplayMemory m(10);
    Rng rng(1);
    EXPECT_THROW(m.sample_indices(rng, 1), std::logic_error);
    m.store(numbered(1));
    EXPECT_THROW(m.sample_batch(rng, 2), std::logic_error);
}

TEST(ReplayMemory, BatchCarriesElapsedSteps) {
    ReplayMemory m(4);
    Transition t = numbered(3);
    t.elapsed_steps = 13;
    t.a = Phase::west;
    m.store(t);
    Rng rng(1);
    const Minibatch b = m.sample_batch(rng, 1);
    EXPECT_EQ(b.elapsed(0), 13);
    EXPECT_EQ(b.actions[0], 7);
    EXPECT_EQ(b.rewards(0), 3);
}

TEST(AgentConfig, RejectsInvalidValues) {
    AgentConfig c;
    c.gamma = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.memory_capacity = 64;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.hidden = {64, 0};
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(AgentConfig{}.architecture(), (std::vector<int>{12, 64, 64, 8}));
}

TEST(DecisionCycle, RepeatSpansTenSwitchSpansThirteen) {
    DqnAgent agent(small_config(), 1);
    agent.force_epsilon(0.0);
    const Phase greedy = greedy_action(forward(agent.online(), StateVector{}));
    WorldState w({}, 3);
    const PatternSpec zero = zero_pattern();

    SignalState same = SignalState::green(greedy, 0);
    EXPECT_EQ(decision_cycle(w, same, agent, zero).steps, 10);

    const Phase other = greedy == Phase::ns_through ? Phase::ns_left : Phase::ns_through;
    SignalState diff = SignalState::green(other, 0);
    EXPECT_EQ(decision_cycle(w, diff, agent, zero).steps, 13);
}

TEST(DecisionCycle, TruncatesAtHorizon) {
    DqnAgent agent(small_config(), 1);
    WorldState w({}, 3);
    w.clock = 1795;
    SignalState s = SignalState::green(Phase::ns_through, 0);
    const DecisionOutcome d = decision_cycle(w, s, agent, zero_pattern());
    EXPECT_EQ(w.clock, 1800);
    EXPECT_EQ(d.steps, 5);
    EXPECT_EQ(d.transition.elapsed_steps, 5);
}

TEST(TrainingEpisode, RewardsTelescope) {
    DqnAgent agent(small_config(), 4);
    const TrainingEpisode ep = run_training_episode(agent, build_pattern("P1"), 12);
    ASSERT_FALSE(ep.decisions.empty());
    std::int64_t sum = 0;
    for (const auto& d : ep.decisions) sum += d.transition.reward;
    EXPECT_EQ(sum, ep.decisions.front().queue_before - ep.decisions.back().queue_after);
    for (std::size_t i = 1; i < ep.decisions.size(); ++i)
        EXPECT_EQ(ep.decisions[i].queue_before, ep.decisions[i - 1].queue_after);
}

TEST(TrainingEpisode, DecisionCountWithinCadenceBounds) {
    DqnAgent agent(small_config(), 5);
    const TrainingEpisode ep = run_training_episode(agent, build_pattern("P2"), 3);
    EXPECT_GE(ep.decisions.size(), 1800u / 13u);
    EXPECT_LE(ep.decisions.size(), 180u);
    int steps = 0;
    for (const auto& d : ep.decisions) steps += d.steps;
    EXPECT_EQ(steps, 1800);
}

TEST(TrainingEpisode, DegenerateEpisodeIsStable) {
    DqnAgent agent(small_config(), 6);
    agent.force_epsilon(1.0);
    const TrainingEpisode ep = run_training_episode(agent, zero_pattern(), 1);
    for (const auto& d : ep.decisions) EXPECT_EQ(d.transition.reward, 0);
    EXPECT_TRUE(std::isfinite(ep.mean_loss));
    EXPECT_TRUE(agent.online().all_finite());
    EXPECT_EQ(ep.result.avg_queue_length, 0.0);
}

TEST(TrainingEpisode, TargetEqualsOnlineAtEnd) {
    DqnAgent agent(small_config(), 7);
    run_training_episode(agent, build_pattern("P1"), 2);
    EXPECT_EQ(agent.target(), agent.online());
    EXPECT_FALSE(agent.online() == init_network(agent.config().architecture(), split_seed(7, kStreamInit)));
}

TEST(TrainingEpisode, EpsilonDecaysPerDecision) {
    DqnAgent agent(small_config(), 8);
    const TrainingEpisode ep = run_training_episode(agent, build_pattern("P1"), 2);
    EXPECT_EQ(agent.training_steps(), static_cast<std::int64_t>(ep.decisions.size()));
    EXPECT_DOUBLE_EQ(ep.epsilon_at_end, EpsilonSchedule{}.at(agent.training_steps()));
}

TEST(TrainingEpisode, Deterministic) {
    DqnAgent a(small_config(), 9), b(small_config(), 9);
    const auto ra = run_training_episode(a, build_pattern("P3"), 4);
    const auto rb = run_training_episode(b, build_pattern("P3"), 4);
    EXPECT_EQ(ra.result, rb.result);
    EXPECT_EQ(ra.mean_loss, rb.mean_loss);
    EXPECT_EQ(a.online(), b.online());
}

TEST(RlController, GreedyAndShapeChecked) {
    const NetworkParams net = init_network({12, 64, 64, 8}, 1);
    RlController c(net);
    const WorldState w({}, 1);
    const PhaseRequest r = c.decide(w, SignalState::green(Phase::ns_through, 0));
    EXPECT_EQ(r.phase, greedy_action(forward(net, StateVector{})));
    EXPECT_EQ(r.green_steps, 10);
    EXPECT_THROW(RlController(init_network({12, 8, 4}, 1)), ArchitectureMismatch);
}
