#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "movement.hpp"

namespace tsc {

/// Piecewise-constant arrival rate (vehicles per step): `rate` applies from
/// `start_step` until the next segment begins.
struct RateSegment {
    std::int64_t start_step = 0;
    double rate = 0.0;
};

/// Per-movement Bernoulli arrival rates, optionally varying in time.
struct PatternSpec {
    std::string id;
    std::array<std::vector<RateSegment>, kNumMovements> rates;

    double rate(std::size_t movement, std::int64_t step) const {
        double r = 0.0;
        for (const auto& seg : rates[movement]) {
            if (seg.start_step > step) break;
            r = seg.rate;
        }
        return r;
    }

    double rate(Movement m, std::int64_t step) const { return rate(movement_index(m), step); }

    /// Time-averaged rate over [0, horizon).
    double nominal_rate(std::size_t movement, std::int64_t horizon) const {
        const auto& segs = rates[movement];
        double acc = 0.0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const std::int64_t begin = std::max<std::int64_t>(segs[i].start_step, 0);
            const std::int64_t end = i + 1 < segs.size() ? segs[i + 1].start_step : horizon;
            if (end > begin) acc += segs[i].rate * static_cast<double>(std::min(end, horizon) - begin);
        }
        return horizon > 0 ? acc / static_cast<double>(horizon) : 0.0;
    }

    void set_constant(Movement m, double r) { rates[movement_index(m)] = {{0, r}}; }

    void validate() const {
        for (std::size_t i = 0; i < kNumMovements; ++i) {
            std::int64_t last = -1;
            for (const auto& seg : rates[i]) {
                if (!(seg.rate >= 0.0 && seg.rate <= 1.0))
                    throw ConfigError("pattern." + to_string(movement_at(i)), "rate outside [0, 1]");
                if (seg.start_step <= last)
                    throw ConfigError("pattern." + to_string(movement_at(i)), "segments not increasing");
                last = seg.start_step;
            }
        }
    }
};

inline PatternSpec uniform_pattern(double r, std::string id = "uniform") {
    PatternSpec p;
    p.id = std::move(id);
    for (const auto m : all_movements()) p.set_constant(m, r);
    return p;
}

inline PatternSpec zero_pattern() { return uniform_pattern(0.0, "zero"); }

namespace detail {
inline void set_approach(PatternSpec& p, Approach a, double through, double left, double right) {
    p.set_constant({a, Turn::through}, through);
    p.set_constant({a, Turn::left}, left);
    p.set_constant({a, Turn::right}, right);
}
} // namespace detail

inline const std::vector<std::string>& pattern_ids() {
    static const std::vector<std::string> ids{"P1", "P2", "P3", "P4"};
    return ids;
}

/// Benchmark demand patterns. A row "X-Y" is the approach from X heading to
/// Y, i.e. the X approach's three movements.
inline PatternSpec build_pattern(const std::string& id) {
    using A = Approach;
    PatternSpec p;
    p.id = id;
    if (id == "P1") { // major (E-W) / minor (N-S) road
        detail::set_approach(p, A::north, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::south, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::east, 0.1, 0.05, 0.01);
        detail::set_approach(p, A::west, 0.1, 0.05, 0.01);
    } else if (id == "P2") { // heavy E-W left turns
        detail::set_approach(p, A::north, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::south, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::east, 0.05, 0.1, 0.01);
        detail::set_approach(p, A::west, 0.05, 0.1, 0.01);
    } else if (id == "P3") { // tidal: north and east heavier
        detail::set_approach(p, A::north, 0.1, 0.08, 0.01);
        detail::set_approach(p, A::south, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::east, 0.1, 0.08, 0.01);
        detail::set_approach(p, A::west, 0.05, 0.025, 0.01);
    } else if (id == "P4") { // time-varying E-W through demand
        detail::set_approach(p, A::north, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::south, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::east, 0.05, 0.025, 0.01);
        detail::set_approach(p, A::west, 0.05, 0.025, 0.01);
        p.rates[movement_index({A::east, Turn::through})] = {{0, 0.05}, {1200, 0.15}};
        p.rates[movement_index({A::west, Turn::through})] = {{0, 0.15}, {600, 0.05}};
    } else {
        throw ConfigError("pattern", "unknown pattern '" + id + "' (expected P1, P2, P3 or P4)");
    }
    return p;
}

} // namespace tsc
