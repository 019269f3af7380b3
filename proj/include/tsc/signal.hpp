#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "movement.hpp"
#include "params.hpp"

namespace tsc {

/// The eight signal phases; also the agent's action space. The first four
/// serve opposing approaches together, the last four one approach each.
enum class Phase : std::uint8_t {
    ns_through, // N/S through + right
    ns_left,    // N/S left
    ew_through, // E/W through + right
    ew_left,    // E/W left
    north,      // all N movements
    south,
    east,
    west,
};

inline constexpr std::size_t kNumPhases = 8;

constexpr std::size_t phase_index(Phase p) noexcept { return static_cast<std::size_t>(p); }
constexpr Phase phase_at(std::size_t i) noexcept { return static_cast<Phase>(i); }
/// 1-based phase number used in logs.
constexpr int phase_number(Phase p) noexcept { return static_cast<int>(p) + 1; }

inline std::string to_string(Phase p) { return "phase" + std::to_string(phase_number(p)); }

using MovementSet = std::vector<Movement>;

/// Movements granted green by each phase. Kept in one table so the
/// assignment can be swapped without touching the signal logic.
inline const std::array<MovementSet, kNumPhases>& phase_table() {
    using A = Approach;
    using T = Turn;
    static const std::array<MovementSet, kNumPhases> table{{
        {{A::north, T::through}, {A::north, T::right}, {A::south, T::through}, {A::south, T::right}},
        {{A::north, T::left}, {A::south, T::left}},
        {{A::east, T::through}, {A::east, T::right}, {A::west, T::through}, {A::west, T::right}},
        {{A::east, T::left}, {A::west, T::left}},
        {{A::north, T::left}, {A::north, T::through}, {A::north, T::right}},
        {{A::south, T::left}, {A::south, T::through}, {A::south, T::right}},
        {{A::east, T::left}, {A::east, T::through}, {A::east, T::right}},
        {{A::west, T::left}, {A::west, T::through}, {A::west, T::right}},
    }};
    return table;
}

inline bool phase_serves(Phase p, Movement m) {
    const auto& set = phase_table()[phase_index(p)];
    return std::find(set.begin(), set.end(), m) != set.end();
}

inline bool phase_serves_lane(Phase p, std::size_t lane) { return phase_serves(p, controlling_movement(lane)); }

/// Path conflict under four-leg right-hand geometry. Same-approach movements
/// never conflict. A right turn conflicts only with movements merging onto
/// its exit leg. Among lefts and throughs, opposing throughs and opposing
/// lefts are compatible, opposing left/through cross, and any pair from
/// crossing approaches cross.
constexpr bool conflicts(Movement a, Movement b) noexcept {
    if (a.approach == b.approach) return false;
    if (a.turn == Turn::right && b.turn == Turn::right) return false;
    if (a.turn == Turn::right || b.turn == Turn::right) return destination(a) == destination(b);
    if (are_opposing(a.approach, b.approach)) return (a.turn == Turn::left) != (b.turn == Turn::left);
    return true;
}

enum class Interval : std::uint8_t { green, yellow };

/// Green(phase) or Yellow(phase -> next_phase). `remaining` counts time
/// steps left in the interval; Green with remaining 0 is a decision point.
struct SignalState {
    Interval interval = Interval::green;
    Phase phase = Phase::ns_through;
    Phase next_phase = Phase::ns_through;
    int remaining = 0;
    int next_green = 0;    // yellow only: length of the green that follows
    int green_elapsed = 0; // steps of the current uninterrupted green run

    static SignalState green(Phase p, int steps, int elapsed = 0) {
        return {Interval::green, p, p, steps, 0, elapsed};
    }

    static SignalState yellow(Phase from, Phase to, int steps, int following_green) {
        return {Interval::yellow, from, to, steps, following_green, 0};
    }

    bool at_decision_point() const noexcept { return interval == Interval::green && remaining == 0; }

    friend bool operator==(const SignalState&, const SignalState&) = default;
};

/// Decision-point transition with an explicit green length (in steps).
/// Repeating the current phase extends it; any other phase goes through
/// yellow first.
inline SignalState actuate(const SignalState& s, Phase requested, int green_steps, int yellow_steps) {
    if (!s.at_decision_point())
        throw SequencingError("actuate called mid-interval (remaining=" + std::to_string(s.remaining) + ")");
    if (green_steps <= 0) throw SequencingError("green length must be positive");
    if (requested == s.phase) return SignalState::green(s.phase, green_steps, s.green_elapsed);
    return SignalState::yellow(s.phase, requested, yellow_steps, green_steps);
}

/// Agent-style actuation: green for one phase span.
inline SignalState actuate(const SignalState& s, Phase requested, const SimParams& params) {
    return actuate(s, requested, params.phase_span_steps(), params.yellow_steps());
}

/// Advance the signal by one time step. Yellow hands over to its pending green
/// automatically; a finished green stays at the decision point.
inline SignalState advance(const SignalState& s) noexcept {
    SignalState out = s;
    if (s.remaining <= 0) return out;
    --out.remaining;
    if (s.interval == Interval::green) {
        ++out.green_elapsed;
    } else if (out.remaining == 0) {
        out = SignalState::green(s.next_phase, s.next_green);
    }
    return out;
}

inline bool is_green(Movement m, const SignalState& s) {
    return s.interval == Interval::green && phase_serves(s.phase, m);
}

enum class Aspect : std::uint8_t { green, yellow, red };

/// Aspect shown to a lane. Lanes that were green in the phase being left see
/// yellow during the change interval; everything else is red.
inline Aspect lane_aspect(std::size_t lane, const SignalState& s) {
    if (!phase_serves_lane(s.phase, lane)) return Aspect::red;
    return s.interval == Interval::green ? Aspect::green : Aspect::yellow;
}

} // namespace tsc
