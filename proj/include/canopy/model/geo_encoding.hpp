#pragma once

#include <array>

#include "canopy/numerics/tensor.hpp"

namespace canopy::model {

/// (sin lon, cos lon, lat/90). Longitude wraps, latitude is monotone.
/// Accepts lon in [-180, 180] and lat in [-90, 90]; throws otherwise.
std::array<float, 3> geo_channels(double lon_deg, double lat_deg);

/// The encoding of one location broadcast to a [3,H,W] tensor.
numerics::Tensor encode_geo(double lon_deg, double lat_deg, int height, int width);

}  // namespace canopy::model
