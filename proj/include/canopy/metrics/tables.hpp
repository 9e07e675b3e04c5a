#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "canopy/metrics/calibration.hpp"
#include "canopy/metrics/errors.hpp"
#include "canopy/metrics/filtering.hpp"

namespace canopy::metrics {

/// Everything `evaluate` produces for one set of pairs.
struct MetricsReport {
    ErrorMetrics overall;
    BalancedMetrics balanced;
    CalibrationReport calibration;
    std::vector<FilterPoint> filtering;
};

MetricsReport evaluate_pairs(std::span<const EvalPair> pairs, std::size_t calibration_bins = 20,
                             BinMode mode = BinMode::equal_width);

/// Tab-separated tables, each introduced by a line "# <name>" and a header
/// row, separated by blank lines. Tables and columns:
///
///   summary      n rmse me mae rmv armse ame amae uce auce
///   height_bins  lower upper n rmse me mae rmv
///   calibration  lower upper n rmse me mae rmv
///   filtering    fraction retained_pct n rmse me mae
///
/// Units are meters (variances are reported as rmv, in meters). An
/// open-ended upper edge is written as "inf".
void write_report(std::ostream& os, const MetricsReport& report);
std::string report_to_text(const MetricsReport& report);

}  // namespace canopy::metrics
