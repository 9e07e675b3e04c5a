#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "canopy/metrics/errors.hpp"

namespace canopy::metrics {

struct FilterPoint {
    double fraction = 0.0;     // share of pairs removed
    std::size_t removed = 0;   // floor(fraction * n)
    ErrorMetrics metrics;      // on the retained pairs
};

/// Removes the floor(f*n) pairs with the highest predicted variance and
/// reports metrics on the rest. Ties are broken by input order: among equal
/// variances the later pairs are removed first. Each f must lie in [0, 1).
std::vector<FilterPoint> filtering_curve(std::span<const EvalPair> pairs, std::span<const double> fractions);

/// Fractions 0, 0.05, ..., 0.95.
std::vector<double> default_filter_fractions();

}  // namespace canopy::metrics
