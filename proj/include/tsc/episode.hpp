#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "controllers.hpp"
#include "format.hpp"
#include "pattern.hpp"
#include "signal.hpp"
#include "sim.hpp"

namespace tsc {

inline constexpr std::int64_t kEpisodeSteps = 1800;

struct EpisodeResult {
    double avg_queue_length = 0.0; // halting vehicles per lane per step
    double avg_wait_time = 0.0;    // seconds per entered vehicle
    std::int64_t vehicles_entered = 0;
    std::int64_t vehicles_departed = 0;

    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

/// Includes the wait of vehicles still on the lanes.
inline EpisodeResult episode_result(const WorldState& w) {
    EpisodeResult r;
    const auto& m = w.metrics;
    if (m.steps_elapsed > 0)
        r.avg_queue_length = static_cast<double>(m.halting_vehicle_step_sum) /
                             (static_cast<double>(m.steps_elapsed) * static_cast<double>(kNumLanes));
    r.avg_wait_time = m.vehicles_entered > 0 ? m.wait_sum / static_cast<double>(m.vehicles_entered) : 0.0;
    r.vehicles_entered = m.vehicles_entered;
    r.vehicles_departed = m.vehicles_departed;
    return r;
}

/// One row of the per-decision log.
struct DecisionRecord {
    std::int64_t step = 0;
    Phase chosen = Phase::ns_through;
    Interval interval = Interval::green; // green: extension, yellow: switch
    double elapsed_green = 0.0;          // seconds, at the decision point
};

inline void write_decision_header(std::ostream& os) { os << "step,chosen_phase,interval_kind,elapsed_green\n"; }

inline void write_decision_row(std::ostream& os, const DecisionRecord& r) {
    os << r.step << ',' << phase_number(r.chosen) << ',' << (r.interval == Interval::green ? "green" : "yellow") << ','
       << format_double(r.elapsed_green) << '\n';
}

/// Optional sinks for a single episode.
struct EpisodeSinks {
    std::ostream* trace = nullptr;
    std::vector<DecisionRecord>* decisions = nullptr;
};

/// Step the world until the signal reaches its next decision point or the
/// clock reaches `horizon`. Returns the number of steps taken.
inline int run_until_decision(WorldState& w, SignalState& signal, const PatternSpec& pattern, std::int64_t horizon,
                              std::ostream* trace = nullptr) {
    int n = 0;
    while (!signal.at_decision_point() && w.clock < horizon) {
        step(w, signal, pattern);
        signal = advance(signal);
        if (trace != nullptr) write_trace_rows(*trace, w);
        ++n;
    }
    return n;
}

/// Apply a controller request at a decision point, logging it if asked.
inline SignalState apply_request(const WorldState& w, const SignalState& signal, const PhaseRequest& req,
                                 std::vector<DecisionRecord>* log) {
    SignalState next = actuate(signal, req.phase, req.green_steps, w.params.yellow_steps());
    if (log != nullptr)
        log->push_back({w.clock, req.phase, next.interval, elapsed_green_seconds(signal, w.params)});
    return next;
}

/// Fresh world, `horizon` steps under `controller`. The signal starts at a
/// decision point in the first cycle phase.
inline EpisodeResult run_episode(Controller& controller, const PatternSpec& pattern, std::uint64_t seed,
                                 const SimParams& params = {}, EpisodeSinks sinks = {},
                                 std::int64_t horizon = kEpisodeSteps) {
    WorldState w(params, seed);
    SignalState signal = SignalState::green(Phase::ns_through, 0);
    while (w.clock < horizon) {
        signal = apply_request(w, signal, controller.decide(w, signal), sinks.decisions);
        run_until_decision(w, signal, pattern, horizon, sinks.trace);
    }
    return episode_result(w);
}

} // namespace tsc
