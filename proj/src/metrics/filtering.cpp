#include "canopy/metrics/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canopy/numerics/error.hpp"

namespace canopy::metrics {

std::vector<FilterPoint> filtering_curve(std::span<const EvalPair> pairs, std::span<const double> fractions) {
    if (pairs.empty()) throw Error("filtering curve: no pairs");
    for (double f : fractions)
        if (!(f >= 0.0 && f < 1.0)) throw Error("filtering curve: fraction must lie in [0, 1)");

    const std::size_t n = pairs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pairs[a].uncertainty < pairs[b].uncertainty; });
    std::vector<EvalPair> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = pairs[order[i]];

    std::vector<FilterPoint> out;
    for (double f : fractions) {
        const auto removed = std::min(n - 1, static_cast<std::size_t>(std::floor(f * static_cast<double>(n))));
        out.push_back({f, removed, error_metrics(std::span(sorted).first(n - removed))});
    }
    return out;
}

std::vector<double> default_filter_fractions() {
    std::vector<double> f;
    for (int i = 0; i < 20; ++i) f.push_back(0.05 * i);
    return f;
}

}  // namespace canopy::metrics
