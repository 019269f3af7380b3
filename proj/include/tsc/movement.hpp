#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace tsc {

// Approaches are listed clockwise; lane and state ordering follow this order.
enum class Approach : std::uint8_t { north, east, south, west };
enum class Turn : std::uint8_t { left, through, right };
enum class LaneRole : std::uint8_t { left, through, through_right };

inline constexpr std::size_t kNumApproaches = 4;
inline constexpr std::size_t kNumMovements = 12;
inline constexpr std::size_t kNumLanes = 12;

struct Movement {
    Approach approach;
    Turn turn;

    friend constexpr bool operator==(Movement, Movement) = default;
};

constexpr std::size_t movement_index(Movement m) noexcept {
    return static_cast<std::size_t>(m.approach) * 3 + static_cast<std::size_t>(m.turn);
}

constexpr Movement movement_at(std::size_t index) noexcept {
    return {static_cast<Approach>(index / 3), static_cast<Turn>(index % 3)};
}

constexpr std::array<Movement, kNumMovements> all_movements() noexcept {
    std::array<Movement, kNumMovements> out{};
    for (std::size_t i = 0; i < kNumMovements; ++i) out[i] = movement_at(i);
    return out;
}

/// Lane ordering: N(left, through, through_right), E(...), S(...), W(...).
constexpr std::size_t lane_index(Approach a, LaneRole r) noexcept {
    return static_cast<std::size_t>(a) * 3 + static_cast<std::size_t>(r);
}

constexpr Approach lane_approach(std::size_t lane) noexcept { return static_cast<Approach>(lane / 3); }
constexpr LaneRole lane_role(std::size_t lane) noexcept { return static_cast<LaneRole>(lane % 3); }

/// The movement whose signal governs a lane. The shared through/right lane
/// obeys the through signal, so right-on-red is never allowed.
constexpr Movement controlling_movement(std::size_t lane) noexcept {
    const Turn t = lane_role(lane) == LaneRole::left ? Turn::left : Turn::through;
    return {lane_approach(lane), t};
}

constexpr Approach opposite(Approach a) noexcept {
    return static_cast<Approach>((static_cast<int>(a) + 2) % 4);
}

constexpr bool are_opposing(Approach a, Approach b) noexcept { return opposite(a) == b; }

/// Leg on which the movement leaves the intersection (right-hand traffic).
constexpr Approach destination(Movement m) noexcept {
    const int a = static_cast<int>(m.approach);
    switch (m.turn) {
    case Turn::through: return opposite(m.approach);
    case Turn::left: return static_cast<Approach>((a + 1) % 4);
    case Turn::right: return static_cast<Approach>((a + 3) % 4);
    }
    return m.approach;
}

inline std::string to_string(Approach a) {
    constexpr std::array<const char*, 4> names{"N", "E", "S", "W"};
    return names[static_cast<std::size_t>(a)];
}

inline std::string to_string(Turn t) {
    constexpr std::array<const char*, 3> names{"left", "through", "right"};
    return names[static_cast<std::size_t>(t)];
}

inline std::string to_string(Movement m) { return to_string(m.approach) + "." + to_string(m.turn); }

} // namespace tsc
