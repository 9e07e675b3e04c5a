#include "canopy/data/grid.hpp"

#include <algorithm>
#include <string>

namespace canopy::data {

GeoTransform GeoTransform::from_gsd(double origin_lon, double origin_lat, double gsd_m) {
    if (!(gsd_m > 0.0)) throw Error("geo transform: gsd must be positive");
    return {origin_lon, origin_lat, gsd_m / 111320.0};
}

GeoTransform GeoTransform::shifted(int x0, int y0) const {
    return {origin_lon + x0 * deg_per_pixel, origin_lat - y0 * deg_per_pixel, deg_per_pixel};
}

template <typename T>
Grid<T>::Grid(int channels, int height, int width, T fill)
    : channels_(channels), height_(height), width_(width) {
    if (channels < 1 || height < 1 || width < 1) {
        throw Error("grid: extent must be positive, got " + std::to_string(channels) + "x" +
                    std::to_string(height) + "x" + std::to_string(width));
    }
    values_.assign(static_cast<std::size_t>(channels) * plane(), fill);
}

template <typename T>
Grid<T> Grid<T>::crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > width_ || y0 + h > height_) {
        throw Error("grid: crop window outside the grid");
    }
    Grid out(channels_, h, w);
    for (int c = 0; c < channels_; ++c) {
        for (int y = 0; y < h; ++y) {
            const T* src = &values_[index(c, y0 + y, x0)];
            std::copy(src, src + w, &out.at(c, y, 0));
        }
    }
    return out;
}

template class Grid<float>;
template class Grid<std::uint8_t>;
template class Grid<double>;

}  // namespace canopy::data
