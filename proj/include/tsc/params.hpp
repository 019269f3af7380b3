#pragma once

#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace tsc {

/// Intersection geometry, vehicle dynamics and signal timing. Distances in
/// meters, speeds in m/s, durations in seconds.
struct SimParams {
    double lane_length = 150.0;
    double vehicle_length = 5.0;
    double min_gap = 2.5;
    double v_max = 13.42;
    double accel = 2.6;
    double decel = 4.5;
    double yellow_duration = 3.0;
    double phase_span = 10.0;
    double time_step = 1.0;
    double halt_threshold = 0.1;
    double reaction_time = 1.0;
    double driver_imperfection = 0.0;

    /// Vehicles that fit on a lane at standstill.
    std::size_t lane_capacity() const {
        return static_cast<std::size_t>(std::floor(lane_length / (vehicle_length + min_gap)));
    }

    int yellow_steps() const { return static_cast<int>(std::lround(yellow_duration / time_step)); }
    int phase_span_steps() const { return static_cast<int>(std::lround(phase_span / time_step)); }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be strictly positive");
        };
        positive(lane_length, "sim.lane_length");
        positive(vehicle_length, "sim.vehicle_length");
        positive(min_gap, "sim.min_gap");
        positive(v_max, "sim.v_max");
        positive(accel, "sim.accel");
        positive(decel, "sim.decel");
        positive(yellow_duration, "sim.yellow_duration");
        positive(phase_span, "sim.phase_span");
        positive(time_step, "sim.time_step");
        positive(halt_threshold, "sim.halt_threshold");
        positive(reaction_time, "sim.reaction_time");
        if (!(driver_imperfection >= 0.0 && driver_imperfection <= 1.0))
            throw ConfigError("sim.driver_imperfection", "must lie in [0, 1]");
        if (!(halt_threshold < v_max)) throw ConfigError("sim.halt_threshold", "must be below v_max");
        if (yellow_duration < time_step) throw ConfigError("sim.yellow_duration", "must be at least one time step");
        auto multiple = [this](double v, const char* name) {
            const double k = v / time_step;
            if (std::abs(k - std::round(k)) > 1e-9) throw ConfigError(name, "must be a multiple of time_step");
        };
        multiple(phase_span, "sim.phase_span");
        multiple(yellow_duration, "sim.yellow_duration");
        if (lane_capacity() < 1) throw ConfigError("sim.lane_length", "lane holds no vehicle");
    }
};

} // namespace tsc
