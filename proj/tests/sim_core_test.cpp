#include <cmath>

#include <gtest/gtest.h>

#include <tsc/sim.hpp>

using namespace tsc;

namespace {

const SimParams P{};

Vehicle car(double pos, double speed) {
    Vehicle v;
    v.position = pos;
    v.speed = speed;
    return v;
}

// Phase 3 (E-W through) leaves every north lane red.
const SignalState kNorthRed = SignalState::green(Phase::ew_through, 1000);
const SignalState kNorthGreen = SignalState::green(Phase::ns_through, 1000);
const std::size_t kNorthThrough = lane_index(Approach::north, LaneRole::through);

PatternSpec single_movement(Movement m, double rate) {
    PatternSpec p = zero_pattern();
    p.id = "single";
    p.set_constant(m, rate);
    return p;
}

} // namespace

TEST(SafeSpeed, ZeroGapStationaryLeaderForcesZero) { EXPECT_EQ(krauss_safe_speed(10, 0, 0, P), 0.0); }

TEST(SafeSpeed, HandEvaluatedFormula) {
    // 5 + (20 - 5*1) / (1 + 7.5/4.5)
    EXPECT_DOUBLE_EQ(krauss_safe_speed(10, 5, 20, P), 5.0 + 15.0 / (1.0 + 7.5 / 4.5));
    EXPECT_NEAR(krauss_safe_speed(10, 5, 20, P), 10.625, 1e-12);
}

TEST(SafeSpeed, NotClampedAbove) { EXPECT_DOUBLE_EQ(krauss_safe_speed(0, 0, 100, P), 100.0); }

TEST(KraussUpdate, AccelerationBoundFromRest) {
    Rng rng(1);
    EXPECT_DOUBLE_EQ(krauss_update(car(0, 0), P.v_max, kFreeRoadGap, P, rng), 2.6);
}

TEST(KraussUpdate, CappedAtSpeedLimit) {
    Rng rng(1);
    EXPECT_DOUBLE_EQ(krauss_update(car(0, 13.42), P.v_max, kFreeRoadGap, P, rng), 13.42);
}

TEST(KraussUpdate, StationaryLeaderAtZeroGap) {
    Rng rng(1);
    EXPECT_EQ(krauss_update(car(0, 5), 0, 0, P, rng), 0.0);
}

TEST(KraussUpdate, NoRandomDrawWithoutImperfection) {
    Rng a(3), b(3);
    krauss_update(car(0, 4), 3, 20, P, a);
    EXPECT_TRUE(a == b);
}

TEST(EffectiveLeader, FrontVehicleOnGreenSeesFreeRoad) {
    Lane lane;
    lane.index = kNorthThrough;
    lane.vehicles = {car(140, 5)};
    const LeaderView l = effective_leader(lane, 0, kNorthGreen, P);
    EXPECT_EQ(l.gap, kFreeRoadGap);
    EXPECT_FALSE(l.stop_line);
}

TEST(EffectiveLeader, FrontVehicleOnRedSeesStopLine) {
    Lane lane;
    lane.index = kNorthThrough;
    lane.vehicles = {car(140, 5)};
    const LeaderView l = effective_leader(lane, 0, kNorthRed, P);
    EXPECT_EQ(l.speed, 0.0);
    EXPECT_DOUBLE_EQ(l.gap, 10.0);
    EXPECT_TRUE(l.stop_line);
}

TEST(EffectiveLeader, PhysicalLeaderGap) {
    Lane lane;
    lane.index = kNorthThrough;
    lane.vehicles = {car(100, 7), car(80, 3)};
    const LeaderView l = effective_leader(lane, 1, kNorthRed, P);
    EXPECT_DOUBLE_EQ(l.gap, 12.5);
    EXPECT_EQ(l.speed, 7.0);
}

TEST(EffectiveLeader, YellowCommittedVehicleProceeds) {
    Lane lane;
    lane.index = kNorthThrough;
    const SignalState y = SignalState::yellow(Phase::ns_through, Phase::ew_through, 3, 10);
    lane.vehicles = {car(145, 13.42)}; // 13.42^2/9 = 20 m to stop > 5 m left
    EXPECT_FALSE(effective_leader(lane, 0, y, P).stop_line);
    lane.vehicles = {car(100, 13.42)};
    EXPECT_TRUE(effective_leader(lane, 0, y, P).stop_line);
}

TEST(Arrivals, ZeroRateNeverArrives) {
    WorldState w(P, 5);
    const PatternSpec zero = zero_pattern();
    for (int t = 0; t < 1800; ++t) step(w, kNorthRed, zero);
    EXPECT_EQ(w.metrics.vehicles_entered, 0);
    EXPECT_EQ(w.occupancy(), 0u);
}

TEST(Arrivals, RateOneInsertsAtMostOnePerStepUntilFull) {
    WorldState w(P, 5);
    const PatternSpec p = single_movement({Approach::north, Turn::left}, 1.0);
    const Lane& lane = w.lanes[lane_index(Approach::north, LaneRole::left)];
    std::size_t prev = 0;
    for (int t = 1; t <= 600; ++t) {
        step(w, kNorthRed, p);
        ASSERT_LE(lane.vehicles.size(), prev + 1);
        ASSERT_EQ(lane.vehicles.size() + lane.backlog, static_cast<std::size_t>(t));
        prev = lane.vehicles.size();
    }
    // The first two enter back to back; after that the car-following
    // headway behind a vehicle at v_max, not the entry rule, spaces them.
    EXPECT_EQ(lane.vehicles.size(), P.lane_capacity());
    EXPECT_EQ(w.metrics.vehicles_entered, 600);
}

TEST(Arrivals, WestThroughCountWithinBinomialBounds) {
    WorldState w(P, 11);
    const PatternSpec p1 = build_pattern("P1");
    for (int t = 0; t < 1800; ++t) step(w, kNorthRed, p1);
    const double n = static_cast<double>(w.metrics.arrivals_by_movement[movement_index({Approach::west, Turn::through})]);
    EXPECT_NEAR(n, 180.0, 3.0 * std::sqrt(1800 * 0.1 * 0.9));
}

TEST(Arrivals, ThroughArrivalsUseShorterThroughLane) {
    WorldState w(P, 2);
    const std::size_t through = lane_index(Approach::east, LaneRole::through);
    const std::size_t shared = lane_index(Approach::east, LaneRole::through_right);
    w.lanes[through].vehicles = {car(100, 0)};
    const PatternSpec p = single_movement({Approach::east, Turn::through}, 1.0);
    const auto arrivals = sample_arrivals(w, p);
    ASSERT_EQ(arrivals.size(), 1u);
    EXPECT_EQ(arrivals[0].lane, shared);
}

TEST(Step, EmptyWorldAdvancesClock) {
    WorldState w(P, 1);
    step(w, kNorthRed, zero_pattern());
    EXPECT_EQ(w.clock, 1);
    EXPECT_EQ(w.occupancy(), 0u);
    EXPECT_EQ(w.metrics.halting_vehicle_step_sum, 0);
}

TEST(Step, VehicleCrossingStopLineDeparts) {
    WorldState w(P, 1);
    w.lanes[kNorthThrough].vehicles = {car(149, 13.42)};
    step(w, kNorthGreen, zero_pattern());
    EXPECT_EQ(w.metrics.vehicles_departed, 1);
    EXPECT_TRUE(w.lanes[kNorthThrough].vehicles.empty());
    EXPECT_EQ(w.lanes[kNorthThrough].last_departure_step, 0);
}

TEST(Step, RedHoldsVehicleAndAccruesWaitAndTimeLoss) {
    WorldState w(P, 1);
    w.lanes[kNorthThrough].vehicles = {car(150, 0)};
    for (int t = 0; t < 10; ++t) step(w, kNorthRed, zero_pattern());
    const Vehicle& v = w.lanes[kNorthThrough].vehicles.at(0);
    EXPECT_DOUBLE_EQ(v.wait_accum, 10.0);
    EXPECT_DOUBLE_EQ(v.time_loss_accum, 10.0);
    EXPECT_DOUBLE_EQ(v.position, 150.0);
    EXPECT_DOUBLE_EQ(w.metrics.wait_sum, 10.0);
    EXPECT_EQ(w.metrics.halting_vehicle_step_sum, 10);
}

TEST(Step, ReachesSpeedLimitInSixSteps) {
    WorldState w(P, 1);
    w.lanes[kNorthThrough].vehicles = {car(0, 0)};
    for (int t = 0; t < 5; ++t) step(w, kNorthGreen, zero_pattern());
    EXPECT_DOUBLE_EQ(w.lanes[kNorthThrough].vehicles[0].speed, 13.0);
    step(w, kNorthGreen, zero_pattern());
    EXPECT_DOUBLE_EQ(w.lanes[kNorthThrough].vehicles[0].speed, 13.42);
}

TEST(Step, PlatoonStopsBehindRedWithoutOverlap) {
    WorldState w(P, 1);
    w.lanes[kNorthThrough].vehicles = {car(120, 13.42), car(100, 13.42), car(80, 13.42)};
    for (int t = 0; t < 60; ++t) {
        step(w, kNorthRed, zero_pattern());
        const auto& vs = w.lanes[kNorthThrough].vehicles;
        ASSERT_LE(vs[0].position, P.lane_length);
        for (std::size_t i = 1; i < vs.size(); ++i) ASSERT_GE(vs[i - 1].position - P.vehicle_length - vs[i].position, 0.0);
    }
    EXPECT_EQ(queue_length(w.lanes[kNorthThrough], P), 3u);
}

TEST(QueueLength, CountsHaltedVehiclesInclusiveThreshold) {
    Lane lane;
    EXPECT_EQ(queue_length(lane, P), 0u);
    lane.vehicles = {car(150, 0), car(142, 0), car(134, 0), car(100, 5), car(60, 5)};
    EXPECT_EQ(queue_length(lane, P), 3u);
    lane.vehicles = {car(150, 0.1)};
    EXPECT_EQ(queue_length(lane, P), 1u);
    lane.vehicles = {car(150, 0.1000001)};
    EXPECT_EQ(queue_length(lane, P), 0u);
}

TEST(ObserveState, EmptyIsZero) {
    const WorldState w(P, 1);
    for (double x : observe_state(w)) EXPECT_EQ(x, 0.0);
    EXPECT_EQ(total_queue(w), 0);
}

TEST(ObserveState, SaturatedLaneIsOne) {
    EXPECT_EQ(P.lane_capacity(), 20u);
    WorldState w(P, 1);
    const std::size_t lane = lane_index(Approach::south, LaneRole::left);
    for (int i = 0; i < 20; ++i) w.lanes[lane].vehicles.push_back(car(150 - 7.5 * i, 0));
    const StateVector s = observe_state(w);
    for (std::size_t i = 0; i < kNumLanes; ++i) EXPECT_EQ(s[i], i == lane ? 1.0 : 0.0);
}

TEST(TotalQueue, SumsPerLaneCounts) {
    WorldState w(P, 1);
    for (std::size_t i = 0; i < kNumLanes; ++i) w.lanes[i].vehicles = {car(150, 0)};
    EXPECT_EQ(total_queue(w), 12);
    w.lanes[3].vehicles.push_back(car(140, 0));
    w.lanes[5].vehicles.push_back(car(140, 4));
    int sum = 0;
    for (const auto& l : w.lanes) sum += static_cast<int>(queue_length(l, P));
    EXPECT_EQ(total_queue(w), sum);
    const QueueCounts q = raw_queues(w);
    EXPECT_EQ(total_queue(q), sum);
}

TEST(Fuzz, RandomSignalsKeepInvariants) {
    const PatternSpec p3 = build_pattern("P3");
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        WorldState w(P, seed);
        Rng pick(seed + 100);
        SignalState s = SignalState::green(Phase::ns_through, 0);
        for (int t = 0; t < 5000; ++t) {
            if (s.at_decision_point()) s = actuate(s, phase_at(pick.below(kNumPhases)), P);
            step(w, s, p3);
            s = advance(s);
            const auto total = static_cast<std::int64_t>(w.occupancy() + w.backlog());
            ASSERT_EQ(w.metrics.vehicles_entered, w.metrics.vehicles_departed + total);
            for (const auto& lane : w.lanes) {
                for (std::size_t i = 0; i < lane.vehicles.size(); ++i) {
                    ASSERT_GE(lane.vehicles[i].speed, 0.0);
                    ASSERT_LE(lane.vehicles[i].speed, P.v_max);
                    if (i > 0) {
                        ASSERT_GE(lane.vehicles[i - 1].position - P.vehicle_length - lane.vehicles[i].position, 0.0);
                    }
                }
            }
        }
    }
}

TEST(Params, ValidationNamesField) {
    SimParams p;
    p.decel = 0;
    try {
        p.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "sim.decel");
    }
}
