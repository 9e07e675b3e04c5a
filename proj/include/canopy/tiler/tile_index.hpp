#pragma once

#include <cstdint>
#include <vector>

#include "canopy/data/grid.hpp"
#include "canopy/data/world.hpp"

namespace canopy::tiler {

/// Per-image metadata of one acquisition over one tile.
struct ImageMeta {
    int acquisition = 0;
    int day_of_year = 0;
    double cloud_fraction = 0.0;

    bool operator==(const ImageMeta&) const = default;
};

/// An orbit's stack of acquisitions as seen from one tile.
struct OrbitCandidate {
    int orbit = 0;
    long empty_pixels = 0;                 // tile pixels outside the swath
    data::Grid<std::uint8_t> coverage;     // tile extent, 1 = inside the swath
    std::vector<ImageMeta> images;         // in acquisition order
};

struct TileIndex {
    int id = 0;
    int tile_x = 0;
    int tile_y = 0;
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    double lon_min = 0.0;
    double lat_min = 0.0;
    double lon_max = 0.0;
    double lat_max = 0.0;
    std::vector<OrbitCandidate> orbits;  // only orbits that touch the tile
};

/// Row-major tiles of `tile_size` pixels; the last row and column may be
/// narrower. Bounds are computed from pixel edges through the world's
/// transform, so neighbors share exact edge coordinates.
std::vector<TileIndex> build_tile_index(const data::WorldState& world, int tile_size);

}  // namespace canopy::tiler
