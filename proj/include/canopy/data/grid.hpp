#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "canopy/numerics/error.hpp"

namespace canopy::data {

/// Maps pixel indices to degrees. Pixel (0,0) has its upper-left corner at
/// (origin_lon, origin_lat); x grows east, y grows south.
struct GeoTransform {
    double origin_lon = 0.0;
    double origin_lat = 0.0;
    double deg_per_pixel = 1.0;

    /// Square pixels of `gsd_m` meters, using 111,320 m per degree.
    static GeoTransform from_gsd(double origin_lon, double origin_lat, double gsd_m);

    double lon(double x) const { return origin_lon + (x + 0.5) * deg_per_pixel; }
    double lat(double y) const { return origin_lat - (y + 0.5) * deg_per_pixel; }
    /// Transform of the window whose pixel (0,0) is this grid's (x0,y0).
    GeoTransform shifted(int x0, int y0) const;

    bool operator==(const GeoTransform&) const = default;
};

/// Dense channels-first raster.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(int channels, int height, int width, T fill = T{});

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t plane() const noexcept { return static_cast<std::size_t>(height_) * width_; }
    bool empty() const noexcept { return values_.empty(); }

    T& at(int c, int y, int x) { return values_[index(c, y, x)]; }
    const T& at(int c, int y, int x) const { return values_[index(c, y, x)]; }
    T& at(int y, int x) { return at(0, y, x); }
    const T& at(int y, int x) const { return at(0, y, x); }

    std::span<T> channel(int c) { return {values_.data() + static_cast<std::size_t>(c) * plane(), plane()}; }
    std::span<const T> channel(int c) const {
        return {values_.data() + static_cast<std::size_t>(c) * plane(), plane()};
    }
    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    std::vector<T>& storage() noexcept { return values_; }

    /// Window [x0, x0+w) x [y0, y0+h); must lie inside the grid.
    Grid crop(int x0, int y0, int w, int h) const;

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<T> values_;
};

extern template class Grid<float>;
extern template class Grid<std::uint8_t>;
extern template class Grid<double>;

}  // namespace canopy::data
