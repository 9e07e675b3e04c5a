#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace canopy::tiler {

enum class RasterType { u8, f32 };

const char* raster_type_name(RasterType t);

/// Geo bounds are degrees of the outer pixel edges.
struct RasterHeader {
    int width = 0;
    int height = 0;
    std::string channel;
    double lon_min = 0.0;
    double lat_min = 0.0;
    double lon_max = 0.0;
    double lat_max = 0.0;
    double gsd_m = 0.0;
    double nodata = 0.0;
    RasterType type = RasterType::u8;

    bool operator==(const RasterHeader&) const = default;
};

/// Single-channel raster. Exactly one of `u8` / `f32` is populated,
/// according to `header.type`.
struct Raster {
    RasterHeader header;
    std::vector<std::uint8_t> u8;
    std::vector<float> f32;
};

/// Text header followed by a row-major little-endian payload:
///
///   canopy-raster
///   version 1
///   size <width> <height>
///   channel <name>
///   bounds <lon_min> <lat_min> <lon_max> <lat_max>
///   gsd <meters>
///   nodata <value>
///   dtype u8|f32
///   end
void write_raster(std::ostream& os, const RasterHeader& header, std::span<const std::uint8_t> values);
void write_raster(std::ostream& os, const RasterHeader& header, std::span<const float> values);
Raster read_raster(std::istream& is);

/// Atomic (temp file then rename).
void write_raster(const std::filesystem::path& path, const RasterHeader& header, std::span<const std::uint8_t> values);
void write_raster(const std::filesystem::path& path, const RasterHeader& header, std::span<const float> values);
Raster read_raster(const std::filesystem::path& path);

}  // namespace canopy::tiler
