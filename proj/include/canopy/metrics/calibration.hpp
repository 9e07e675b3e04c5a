#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "canopy/metrics/errors.hpp"

namespace canopy::metrics {

enum class BinMode { equal_width, equal_population };

/// One bin of predicted variance. `rmse` is the empirical error of the
/// pairs in the bin, `rmv` the root of their mean predicted variance.
struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t count = 0;
    double rmse = 0.0;
    double me = 0.0;
    double mae = 0.0;
    double rmv = 0.0;
};

struct CalibrationReport {
    std::vector<CalibrationBin> bins;  // all K bins, empty ones included
    double uce = 0.0;   // count-weighted mean |rmse - rmv| over bins
    double auce = 0.0;  // unweighted mean over non-empty bins
    double rmv = 0.0;
    double rmse = 0.0;
};

/// Bins pairs by predicted variance into `num_bins` intervals. Equal-width
/// bins span [min, max] of the observed variances; when all variances are
/// identical every pair lands in the first bin. Equal-population bins take
/// consecutive runs of the variance-sorted pairs (stable order).
CalibrationReport calibration(std::span<const EvalPair> pairs, std::size_t num_bins = 20,
                              BinMode mode = BinMode::equal_width);

}  // namespace canopy::metrics
