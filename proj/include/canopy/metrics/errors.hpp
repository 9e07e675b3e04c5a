#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace canopy::metrics {

/// Prediction and reference in meters; uncertainty is a variance (m^2).
struct EvalPair {
    double prediction = 0.0;
    double reference = 0.0;
    double uncertainty = 0.0;
};

struct ErrorMetrics {
    std::size_t count = 0;
    double rmse = 0.0;
    double me = 0.0;   // mean of prediction - reference
    double mae = 0.0;
    double rmv = 0.0;  // sqrt(mean uncertainty)
};

/// Throws canopy::Error on empty input.
ErrorMetrics error_metrics(std::span<const EvalPair> pairs);
double rmse(std::span<const EvalPair> pairs);
double me(std::span<const EvalPair> pairs);
double mae(std::span<const EvalPair> pairs);

struct HeightBin {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    ErrorMetrics metrics;
};

/// Metrics averaged with equal weight over the non-empty reference-height
/// bins [5k, 5k+5); the last populated bin is open-ended.
struct BalancedMetrics {
    double armse = 0.0;
    double ame = 0.0;
    double amae = 0.0;
    std::vector<HeightBin> bins;  // non-empty bins only, ascending
};

/// Throws on empty input or a negative reference.
BalancedMetrics balanced_metrics(std::span<const EvalPair> pairs, double bin_width = 5.0);

}  // namespace canopy::metrics
