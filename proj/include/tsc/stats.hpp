#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tsc {

/// Quantile by linear interpolation between order statistics
/// (position (n - 1) p in the sorted sample).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline Summary summarize(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("summary of empty sample");
    std::sort(xs.begin(), xs.end());
    Summary s;
    s.n = xs.size();
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    s.median = quantile_sorted(xs, 0.5);
    s.q1 = quantile_sorted(xs, 0.25);
    s.q3 = quantile_sorted(xs, 0.75);
    s.min = xs.front();
    s.max = xs.back();
    return s;
}

/// Relative reduction of `candidate` against `baseline`, in percent.
inline double improvement_percent(double baseline, double candidate) {
    if (baseline == 0.0) return 0.0;
    return 100.0 * (baseline - candidate) / baseline;
}

} // namespace tsc
