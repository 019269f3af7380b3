#pragma once

#include <cstdint>
#include <random>

namespace tsc {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed split: (master, stream, counter) -> seed.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t counter = 0) noexcept {
    return mix64(mix64(master ^ mix64(stream)) + counter);
}

// Stream tags for split_seed.
inline constexpr std::uint64_t kStreamEpisode = 0x45504953ULL;
inline constexpr std::uint64_t kStreamInit = 0x494e4954ULL;
inline constexpr std::uint64_t kStreamAgent = 0x4147454eULL;
inline constexpr std::uint64_t kStreamWorld = 0x574f524cULL;

/// Seeded generator with distribution helpers that do not depend on the
/// standard library's implementation-defined distributions, so streams are
/// reproducible across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) {
        __extension__ using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(engine_()) * n) >> 64);
    }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::mt19937_64 engine_;
};

} // namespace tsc
