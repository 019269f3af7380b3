#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <vector>

#include "format.hpp"
#include "movement.hpp"
#include "params.hpp"
#include "pattern.hpp"
#include "rng.hpp"
#include "signal.hpp"

namespace tsc {

/// `position` is the front bumper, in meters from the lane entry; the stop
/// line sits at `lane_length`.
struct Vehicle {
    std::uint64_t id = 0;
    double position = 0.0;
    double speed = 0.0;
    double wait_accum = 0.0;
    double time_loss_accum = 0.0;
    std::int64_t entered_at = 0;
};

/// One incoming lane. `vehicles` is ordered front (nearest the stop line) to
/// back. `backlog` counts arrivals that could not enter yet.
struct Lane {
    std::size_t index = 0;
    std::vector<Vehicle> vehicles;
    std::size_t backlog = 0;
    std::int64_t last_departure_step = -1;

    Approach approach() const noexcept { return lane_approach(index); }
    LaneRole role() const noexcept { return lane_role(index); }
};

struct MetricsAccumulator {
    std::int64_t halting_vehicle_step_sum = 0;
    std::int64_t vehicles_entered = 0;
    std::int64_t vehicles_departed = 0;
    double wait_sum = 0.0;
    std::int64_t steps_elapsed = 0;
    std::array<std::int64_t, kNumMovements> arrivals_by_movement{};
};

struct WorldState {
    SimParams params;
    std::array<Lane, kNumLanes> lanes;
    std::int64_t clock = 0;
    Rng rng;
    MetricsAccumulator metrics;
    std::uint64_t next_vehicle_id = 0;

    explicit WorldState(const SimParams& p = {}, std::uint64_t seed = 0)
        : params(p), rng(split_seed(seed, kStreamWorld)) {
        for (std::size_t i = 0; i < kNumLanes; ++i) lanes[i].index = i;
    }

    std::size_t occupancy() const {
        std::size_t n = 0;
        for (const auto& l : lanes) n += l.vehicles.size();
        return n;
    }

    std::size_t backlog() const {
        std::size_t n = 0;
        for (const auto& l : lanes) n += l.backlog;
        return n;
    }
};

inline constexpr double kFreeRoadGap = 1.0e9;

/// Krauss (1997) safe speed, clamped below at zero but not above.
inline double krauss_safe_speed(double v_follower, double v_leader, double gap, const SimParams& p) {
    const double v_bar = 0.5 * (v_leader + v_follower);
    const double v = v_leader + (gap - v_leader * p.reaction_time) / (p.reaction_time + v_bar / p.decel);
    return std::max(0.0, v);
}

/// Next speed: min of speed cap, acceleration bound and safe speed, minus
/// optional driver imperfection. With sigma = 0 no random draw is taken.
inline double krauss_update(const Vehicle& vehicle, double leader_speed, double gap, const SimParams& p, Rng& rng) {
    const double desired = std::min({p.v_max, vehicle.speed + p.accel * p.time_step,
                                     krauss_safe_speed(vehicle.speed, leader_speed, gap, p)});
    if (p.driver_imperfection <= 0.0) return std::max(0.0, desired);
    return std::max(0.0, desired - p.driver_imperfection * p.accel * rng.uniform());
}

struct LeaderView {
    double speed = 0.0;
    double gap = kFreeRoadGap;
    bool stop_line = false; // true when the stop line acts as the leader
};

/// Leader seen by vehicle `i`: the physical vehicle ahead if any, otherwise a
/// stationary virtual leader at the stop line unless the lane shows green or
/// (on yellow) the vehicle is too close to stop.
inline LeaderView effective_leader(const Lane& lane, std::size_t i, const SignalState& signal, const SimParams& p) {
    const Vehicle& v = lane.vehicles[i];
    if (i > 0) {
        const Vehicle& lead = lane.vehicles[i - 1];
        const double gap = std::max(0.0, lead.position - p.vehicle_length - v.position - p.min_gap);
        return {lead.speed, gap, false};
    }
    const double to_stop_line = p.lane_length - v.position;
    switch (lane_aspect(lane.index, signal)) {
    case Aspect::green: return {p.v_max, kFreeRoadGap, false};
    case Aspect::yellow:
        // A halted vehicle can always stop, even when parked on the line.
        if (v.speed > p.halt_threshold && v.speed * v.speed / (2.0 * p.decel) > to_stop_line)
            return {p.v_max, kFreeRoadGap, false};
        [[fallthrough]];
    case Aspect::red: break;
    }
    return {0.0, std::max(0.0, to_stop_line), true};
}

inline std::size_t queue_length(const Lane& lane, const SimParams& p) {
    return static_cast<std::size_t>(std::count_if(lane.vehicles.begin(), lane.vehicles.end(),
                                                  [&](const Vehicle& v) { return v.speed <= p.halt_threshold; }));
}

using QueueCounts = std::array<int, kNumLanes>;
using StateVector = std::array<double, kNumLanes>;

inline QueueCounts raw_queues(const WorldState& w) {
    QueueCounts q{};
    for (std::size_t i = 0; i < kNumLanes; ++i) q[i] = static_cast<int>(queue_length(w.lanes[i], w.params));
    return q;
}

inline int total_queue(const QueueCounts& q) { return std::accumulate(q.begin(), q.end(), 0); }
inline int total_queue(const WorldState& w) { return total_queue(raw_queues(w)); }

/// Queue lengths scaled by lane capacity, in lane order.
inline StateVector normalize_queues(const QueueCounts& q, const SimParams& p) {
    StateVector s{};
    const double cap = static_cast<double>(p.lane_capacity());
    for (std::size_t i = 0; i < kNumLanes; ++i) s[i] = q[i] / cap;
    return s;
}

inline StateVector observe_state(const WorldState& w) { return normalize_queues(raw_queues(w), w.params); }

struct Arrival {
    Movement movement;
    std::size_t lane;
};

/// One Bernoulli draw per movement. Left and right arrivals have a fixed
/// lane; a through arrival takes whichever of the two through-capable lanes
/// is shorter (vehicles + backlog), the dedicated through lane on ties.
inline std::vector<Arrival> sample_arrivals(WorldState& w, const PatternSpec& pattern) {
    std::vector<Arrival> out;
    std::array<std::size_t, kNumLanes> load{};
    for (std::size_t i = 0; i < kNumLanes; ++i) load[i] = w.lanes[i].vehicles.size() + w.lanes[i].backlog;
    for (std::size_t m = 0; m < kNumMovements; ++m) {
        const double r = pattern.rate(m, w.clock);
        if (r <= 0.0 || !w.rng.bernoulli(r)) continue;
        const Movement mv = movement_at(m);
        std::size_t lane = 0;
        switch (mv.turn) {
        case Turn::left: lane = lane_index(mv.approach, LaneRole::left); break;
        case Turn::right: lane = lane_index(mv.approach, LaneRole::through_right); break;
        case Turn::through: {
            const std::size_t a = lane_index(mv.approach, LaneRole::through);
            const std::size_t b = lane_index(mv.approach, LaneRole::through_right);
            lane = load[b] < load[a] ? b : a;
            break;
        }
        }
        ++load[lane];
        out.push_back({mv, lane});
    }
    return out;
}

/// Entry needs the rearmost vehicle's tail at least one vehicle length plus
/// min gap past the lane entry.
inline bool has_entry_space(const Lane& lane, const SimParams& p) {
    if (lane.vehicles.empty()) return true;
    return lane.vehicles.back().position - p.vehicle_length >= p.vehicle_length + p.min_gap;
}

/// Counts the arrivals and inserts at most one vehicle per lane (backlog first).
inline void admit_arrivals(WorldState& w, const std::vector<Arrival>& arrivals) {
    for (const auto& a : arrivals) {
        ++w.metrics.arrivals_by_movement[movement_index(a.movement)];
        ++w.metrics.vehicles_entered;
        ++w.lanes[a.lane].backlog;
    }
    for (auto& lane : w.lanes) {
        if (lane.backlog == 0 || !has_entry_space(lane, w.params)) continue;
        Vehicle v;
        v.id = w.next_vehicle_id++;
        v.position = 0.0;
        v.speed = w.params.v_max;
        v.entered_at = w.clock;
        lane.vehicles.push_back(v);
        --lane.backlog;
    }
}

/// Advance the world by one time step under `signal`.
inline void step(WorldState& w, const SignalState& signal, const PatternSpec& pattern) {
    const SimParams& p = w.params;
    const double dt = p.time_step;

    for (auto& lane : w.lanes) {
        // Leaders first, so each follower sees its leader's new speed.
        std::vector<bool> stop_bound(lane.vehicles.size(), false);
        for (std::size_t i = 0; i < lane.vehicles.size(); ++i) {
            const LeaderView lead = effective_leader(lane, i, signal, p);
            lane.vehicles[i].speed = krauss_update(lane.vehicles[i], lead.speed, lead.gap, p, w.rng);
            stop_bound[i] = lead.stop_line;
        }
        for (std::size_t i = 0; i < lane.vehicles.size(); ++i) {
            auto& v = lane.vehicles[i];
            v.position += v.speed * dt;
            if (stop_bound[i]) v.position = std::min(v.position, p.lane_length);
        }
        std::size_t departed = 0;
        while (departed < lane.vehicles.size() && lane.vehicles[departed].position > p.lane_length) ++departed;
        if (departed > 0) {
            lane.vehicles.erase(lane.vehicles.begin(), lane.vehicles.begin() + static_cast<std::ptrdiff_t>(departed));
            w.metrics.vehicles_departed += static_cast<std::int64_t>(departed);
            lane.last_departure_step = w.clock;
        }
    }

    admit_arrivals(w, sample_arrivals(w, pattern));

    std::int64_t halting = 0;
    for (auto& lane : w.lanes) {
        for (auto& v : lane.vehicles) {
            if (v.speed <= p.halt_threshold) {
                v.wait_accum += dt;
                w.metrics.wait_sum += dt;
                ++halting;
            }
            v.time_loss_accum += (1.0 - v.speed / p.v_max) * dt;
        }
    }
    w.metrics.halting_vehicle_step_sum += halting;
    ++w.metrics.steps_elapsed;
    ++w.clock;
}

/// Per-step CSV trace: step,lane_index,vehicle_id,position,speed,halting_flag.
inline void write_trace_header(std::ostream& os) { os << "step,lane_index,vehicle_id,position,speed,halting_flag\n"; }

/// Rows for the step just completed (`clock - 1`).
inline void write_trace_rows(std::ostream& os, const WorldState& w) {
    const std::int64_t s = w.clock - 1;
    for (const auto& lane : w.lanes) {
        for (const auto& v : lane.vehicles) {
            os << s << ',' << lane.index << ',' << v.id << ',' << format_double(v.position) << ','
               << format_double(v.speed) << ',' << (v.speed <= w.params.halt_threshold ? 1 : 0) << '\n';
        }
    }
}

} // namespace tsc
