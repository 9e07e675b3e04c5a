#include "canopy/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace canopy::data {

std::vector<int> validation_tiles(const SplitSpec& spec) {
    if (spec.tile_size < 1 || spec.world_width < 1 || spec.world_height < 1) {
        throw Error("split: tile grid must have positive extents");
    }
    if (spec.validation_fraction < 0.0 || spec.validation_fraction > 1.0) {
        throw Error("split: validation fraction must lie in [0, 1]");
    }
    std::vector<int> ids(static_cast<std::size_t>(spec.tile_count()));
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(spec.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto k = static_cast<std::size_t>(std::lround(spec.validation_fraction * spec.tile_count()));
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::pair<std::vector<FootprintSample>, std::vector<FootprintSample>> split_by_tile(
    std::vector<FootprintSample> samples, const SplitSpec& spec) {
    const std::vector<int> held = validation_tiles(spec);
    std::vector<char> is_val(static_cast<std::size_t>(spec.tile_count()), 0);
    for (int t : held) is_val[static_cast<std::size_t>(t)] = 1;
    std::pair<std::vector<FootprintSample>, std::vector<FootprintSample>> out;
    for (auto& s : samples) {
        if (s.center_x < 0 || s.center_y < 0 || s.center_x >= spec.world_width || s.center_y >= spec.world_height) {
            throw Error("split: sample center outside the tile grid");
        }
        auto& dst = is_val[static_cast<std::size_t>(spec.tile_of(s.center_x, s.center_y))] ? out.second : out.first;
        dst.push_back(std::move(s));
    }
    return out;
}

}  // namespace canopy::data
