#include "canopy/model/geo_encoding.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace canopy::model {

std::array<float, 3> geo_channels(double lon_deg, double lat_deg) {
    if (!(lon_deg >= -180.0 && lon_deg <= 180.0) || !(lat_deg >= -90.0 && lat_deg <= 90.0)) {
        std::ostringstream os;
        os << "geo encoding: coordinates out of range (lon " << lon_deg << ", lat " << lat_deg << ")";
        throw Error(os.str());
    }
    const double a = lon_deg * std::numbers::pi / 180.0;
    // Exact values at the quadrant points keep the cyclic identity exact.
    double s = std::sin(a), c = std::cos(a);
    if (std::fabs(lon_deg) == 180.0) s = 0.0, c = -1.0;
    if (lon_deg == 90.0) s = 1.0, c = 0.0;
    if (lon_deg == -90.0) s = -1.0, c = 0.0;
    return {static_cast<float>(s), static_cast<float>(c), static_cast<float>(lat_deg / 90.0)};
}

numerics::Tensor encode_geo(double lon_deg, double lat_deg, int height, int width) {
    if (height < 1 || width < 1) throw Error("geo encoding: extent must be positive");
    const auto ch = geo_channels(lon_deg, lat_deg);
    numerics::Tensor out(numerics::Shape{3, height, width});
    const std::size_t plane = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] = ch[c];
    }
    return out;
}

}  // namespace canopy::model
