#pragma once

#include <cstdint>
#include <vector>

#include "canopy/data/grid.hpp"

namespace canopy::fusion {

/// One date's prediction in meters, with its per-pixel validity.
struct Observation {
    data::Grid<float> mean;
    data::Grid<float> variance;
    data::Grid<std::uint8_t> valid;
    int member = 0;
    int acquisition = 0;
};

struct ObservationStack {
    int height = 0;
    int width = 0;
    std::vector<Observation> dates;
};

/// Fused per-pixel estimate; pixels without a valid date are invalid and
/// hold 0.
struct FusedPrediction {
    data::Grid<double> mean;
    data::Grid<double> variance;
    data::Grid<std::uint8_t> valid;
};

inline constexpr double kVarianceFloor = 1e-6;

/// Inverse-variance weighting over the valid dates of each pixel:
///
///   p_t   = (1/var_t) / sum_j (1/var_j)
///   mean  = sum_t p_t mu_t
///   var   = sum_t p_t mu_t^2 - mean^2 + sum_t p_t var_t
///
/// evaluated in double precision, with variances floored at
/// `variance_floor`. Throws on a non-positive or non-finite variance or a
/// non-finite mean at a valid pixel, and on mismatched extents.
FusedPrediction fuse(const ObservationStack& stack, double variance_floor = kVarianceFloor);

}  // namespace canopy::fusion
