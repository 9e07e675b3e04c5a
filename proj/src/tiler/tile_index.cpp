#include "canopy/tiler/tile_index.hpp"

#include <algorithm>

#include "canopy/numerics/error.hpp"

namespace canopy::tiler {

std::vector<TileIndex> build_tile_index(const data::WorldState& world, int tile_size) {
    if (tile_size < 1) throw Error("tile index: tile size must be positive");
    const int W = world.width(), H = world.height();
    const int tx_count = (W + tile_size - 1) / tile_size;
    const int ty_count = (H + tile_size - 1) / tile_size;
    const double dpp = world.geo.deg_per_pixel;

    std::vector<TileIndex> tiles;
    for (int ty = 0; ty < ty_count; ++ty) {
        for (int tx = 0; tx < tx_count; ++tx) {
            TileIndex t;
            t.id = ty * tx_count + tx;
            t.tile_x = tx;
            t.tile_y = ty;
            t.x0 = tx * tile_size;
            t.y0 = ty * tile_size;
            t.width = std::min(tile_size, W - t.x0);
            t.height = std::min(tile_size, H - t.y0);
            t.lon_min = world.geo.origin_lon + t.x0 * dpp;
            t.lon_max = world.geo.origin_lon + (t.x0 + t.width) * dpp;
            t.lat_max = world.geo.origin_lat - t.y0 * dpp;
            t.lat_min = world.geo.origin_lat - (t.y0 + t.height) * dpp;

            for (const auto& orbit : world.orbits) {
                const int b = std::max(orbit.x_begin, t.x0), e = std::min(orbit.x_end, t.x0 + t.width);
                if (b >= e) continue;
                OrbitCandidate c;
                c.orbit = orbit.id;
                c.coverage = data::Grid<std::uint8_t>(1, t.height, t.width, 0);
                for (int y = 0; y < t.height; ++y)
                    for (int x = b; x < e; ++x) c.coverage.at(y, x - t.x0) = 1;
                c.empty_pixels = static_cast<long>(t.width - (e - b)) * t.height;
                for (int id : orbit.acquisitions) {
                    const auto& a = world.acquisition(id);
                    c.images.push_back({a.id, a.day_of_year,
                                        data::cloud_fraction(world, a.id, t.x0, t.y0, t.width, t.height)});
                }
                t.orbits.push_back(std::move(c));
            }
            tiles.push_back(std::move(t));
        }
    }
    return tiles;
}

}  // namespace canopy::tiler
