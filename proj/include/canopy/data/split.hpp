#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "canopy/data/footprints.hpp"

namespace canopy::data {

/// Square tiles over a world; a seeded share of tiles is held out.
struct SplitSpec {
    int world_width = 256;
    int world_height = 256;
    int tile_size = 32;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;

    int tiles_x() const { return (world_width + tile_size - 1) / tile_size; }
    int tiles_y() const { return (world_height + tile_size - 1) / tile_size; }
    int tile_count() const { return tiles_x() * tiles_y(); }
    int tile_of(int x, int y) const { return (y / tile_size) * tiles_x() + x / tile_size; }

    bool operator==(const SplitSpec&) const = default;
};

/// Validation tile ids, round(fraction * tiles) of them, sorted.
std::vector<int> validation_tiles(const SplitSpec& spec);

/// Splits by the tile holding each sample's center pixel. Throws if a center
/// lies outside the tile grid.
std::pair<std::vector<FootprintSample>, std::vector<FootprintSample>> split_by_tile(
    std::vector<FootprintSample> samples, const SplitSpec& spec);

}  // namespace canopy::data
