#pragma once

#include <vector>

#include "canopy/tiler/tile_index.hpp"

namespace canopy::tiler {

struct OrbitSelection {
    std::vector<int> candidates;  // indices into TileIndex::orbits, in selection order
    bool partial = false;         // chosen orbits leave tile pixels uncovered
};

/// Orbits ordered by ascending empty-pixel count (ties: lower orbit id),
/// taking the shortest prefix whose union covers the tile, at most
/// `max_orbits` long. Throws when the tile has no candidates.
OrbitSelection select_orbits(const TileIndex& tile, int max_orbits = 2);

/// Inclusive day-of-year range.
struct DateWindow {
    int first_day = 121;  // 1 May
    int last_day = 273;   // 30 September
};

struct ImageSelection {
    std::vector<ImageMeta> images;  // ascending cloud fraction, ties by date
    bool fewer_than_k = false;
};

/// The `k` least cloudy images inside the window. Takes all of them and
/// sets `fewer_than_k` when the window holds fewer. Throws when none fall
/// inside the window.
ImageSelection select_images(const OrbitCandidate& orbit, const DateWindow& window = {}, int k = 10);

}  // namespace canopy::tiler
