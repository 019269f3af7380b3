#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "pattern.hpp"
#include "signal.hpp"
#include "sim.hpp"

namespace tsc {

struct BaselineConfig {
    std::vector<Phase> cycle_order{Phase::ns_through, Phase::ns_left, Phase::ew_through, Phase::ew_left};
    double cycle_green_total = 120.0;
    double min_green = 10.0;
    double max_green = 60.0;
    double max_time_gap = 5.0;
    double time_loss_threshold = 1.0;

    void validate() const {
        if (cycle_order.empty()) throw ConfigError("baseline.cycle_order", "must not be empty");
        if (!(cycle_green_total > 0.0)) throw ConfigError("baseline.cycle_green_total", "must be positive");
        if (!(min_green > 0.0)) throw ConfigError("baseline.min_green", "must be positive");
        if (!(min_green <= max_green)) throw ConfigError("baseline.min_green", "must not exceed max_green");
        if (!(max_time_gap > 0.0)) throw ConfigError("baseline.max_time_gap", "must be positive");
        if (!(time_loss_threshold >= 0.0)) throw ConfigError("baseline.time_loss_threshold", "must be non-negative");
    }
};

/// What a controller asks for at a decision point.
struct PhaseRequest {
    Phase phase;
    int green_steps;
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual std::string name() const = 0;
    /// Called only when `signal.at_decision_point()`.
    virtual PhaseRequest decide(const WorldState& world, const SignalState& signal) = 0;
};

inline Phase next_in_cycle(const std::vector<Phase>& order, Phase current) {
    const auto it = std::find(order.begin(), order.end(), current);
    if (it == order.end()) return order.front();
    return std::next(it) == order.end() ? order.front() : *std::next(it);
}

// -- fixed time ----------------------------------------------------------------

struct FixedTimeSchedule {
    std::vector<PhaseRequest> entries; // green length in steps

    /// Cycle length including one yellow per phase change.
    int period(int yellow_steps) const {
        int total = 0;
        for (const auto& e : entries) total += e.green_steps + yellow_steps;
        return total;
    }
};

/// Green split proportional to the summed nominal arrival rates each phase
/// serves, floored at min_green. All-zero demand falls back to equal split.
inline FixedTimeSchedule fixed_time_schedule(const PatternSpec& pattern, const BaselineConfig& cfg,
                                             const SimParams& params, std::int64_t horizon = 1800) {
    std::vector<double> weights;
    for (const Phase p : cfg.cycle_order) {
        double w = 0.0;
        for (const auto& m : phase_table()[phase_index(p)]) w += pattern.nominal_rate(movement_index(m), horizon);
        weights.push_back(w);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0);
        total = static_cast<double>(weights.size());
    }

    FixedTimeSchedule s;
    for (std::size_t i = 0; i < cfg.cycle_order.size(); ++i) {
        const double seconds = std::max(cfg.min_green, std::round(cfg.cycle_green_total * weights[i] / total));
        const int steps = std::max(1, static_cast<int>(std::lround(seconds / params.time_step)));
        s.entries.push_back({cfg.cycle_order[i], steps});
    }
    return s;
}

class FixedTimeController final : public Controller {
public:
    explicit FixedTimeController(FixedTimeSchedule schedule) : schedule_(std::move(schedule)) {
        if (schedule_.entries.empty()) throw ConfigError("baseline.cycle_order", "empty fixed-time schedule");
    }

    std::string name() const override { return "fixed"; }

    PhaseRequest decide(const WorldState&, const SignalState&) override {
        const PhaseRequest r = schedule_.entries[next_];
        next_ = (next_ + 1) % schedule_.entries.size();
        return r;
    }

    const FixedTimeSchedule& schedule() const { return schedule_; }

private:
    FixedTimeSchedule schedule_;
    std::size_t next_ = 0;
};

// -- actuated baselines ----------------------------------------------------------

enum class Decision { extend, advance };

/// Stop-line detector view of one lane served by the current phase.
struct LaneDetector {
    double seconds_since_crossing = std::numeric_limits<double>::infinity();
    bool occupied = false;
};

/// Per served lane: time since the last stop-line crossing during the
/// current green run (infinity if none) and vehicle presence on the lane.
inline std::vector<LaneDetector> detector_view(const WorldState& w, const SignalState& s) {
    std::vector<LaneDetector> out;
    const std::int64_t green_start = w.clock - s.green_elapsed;
    for (const auto& lane : w.lanes) {
        if (!phase_serves_lane(s.phase, lane.index)) continue;
        LaneDetector d;
        if (lane.last_departure_step >= green_start)
            d.seconds_since_crossing = static_cast<double>(w.clock - lane.last_departure_step) * w.params.time_step;
        d.occupied = !lane.vehicles.empty();
        out.push_back(d);
    }
    return out;
}

inline double elapsed_green_seconds(const SignalState& s, const SimParams& p) { return s.green_elapsed * p.time_step; }

/// Extend while a served lane still discharges a continuous stream.
inline Decision gap_based_decision(const std::vector<LaneDetector>& view, double elapsed_green,
                                   const BaselineConfig& cfg) {
    if (elapsed_green < cfg.min_green) return Decision::extend;
    if (elapsed_green >= cfg.max_green) return Decision::advance;
    const bool continuous = std::any_of(view.begin(), view.end(), [&](const LaneDetector& d) {
        return d.seconds_since_crossing <= cfg.max_time_gap;
    });
    return continuous ? Decision::extend : Decision::advance;
}

/// Extend while any vehicle on a served lane has lost more than the
/// threshold seconds against free-flow travel.
inline Decision time_loss_decision(const WorldState& w, const SignalState& s, const BaselineConfig& cfg) {
    const double elapsed = elapsed_green_seconds(s, w.params);
    if (elapsed < cfg.min_green) return Decision::extend;
    if (elapsed >= cfg.max_green) return Decision::advance;
    for (const auto& lane : w.lanes) {
        if (!phase_serves_lane(s.phase, lane.index)) continue;
        for (const auto& v : lane.vehicles)
            if (v.time_loss_accum > cfg.time_loss_threshold) return Decision::extend;
    }
    return Decision::advance;
}

class GapBasedController final : public Controller {
public:
    GapBasedController(BaselineConfig cfg, SimParams params) : cfg_(std::move(cfg)), params_(params) {}

    std::string name() const override { return "gap"; }

    PhaseRequest decide(const WorldState& w, const SignalState& s) override {
        const Decision d = gap_based_decision(detector_view(w, s), elapsed_green_seconds(s, params_), cfg_);
        const Phase p = d == Decision::extend ? s.phase : next_in_cycle(cfg_.cycle_order, s.phase);
        return {p, params_.phase_span_steps()};
    }

private:
    BaselineConfig cfg_;
    SimParams params_;
};

class TimeLossController final : public Controller {
public:
    TimeLossController(BaselineConfig cfg, SimParams params) : cfg_(std::move(cfg)), params_(params) {}

    std::string name() const override { return "timeloss"; }

    PhaseRequest decide(const WorldState& w, const SignalState& s) override {
        const Decision d = time_loss_decision(w, s, cfg_);
        const Phase p = d == Decision::extend ? s.phase : next_in_cycle(cfg_.cycle_order, s.phase);
        return {p, params_.phase_span_steps()};
    }

private:
    BaselineConfig cfg_;
    SimParams params_;
};

} // namespace tsc
