#include "canopy/tiler/run_map.hpp"

#include <atomic>
#include <chrono>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "canopy/numerics/error.hpp"
#include "canopy/tiler/raster_io.hpp"

namespace canopy::tiler {
namespace {

using Clock = std::chrono::steady_clock;

void run_tile(const data::WorldState& world, const fusion::Ensemble& ensemble, const TileIndex& tile,
              const MapOptions& options, TileRun& run) {
    run.id = tile.id;
    const auto t0 = Clock::now();
    for (int attempt = 1; attempt <= 2 && !run.ok; ++attempt) {
        run.attempts = attempt;
        try {
            if (options.before_attempt) options.before_attempt(tile.id, attempt);
            auto product = process_tile(world, ensemble, tile, options.tile);
            if (options.out_dir) write_tile_rasters(*options.out_dir, product, world.params.gsd_m);
            run.product = std::move(product);
            run.ok = true;
            run.error.clear();
        } catch (const std::exception& e) {
            run.error = e.what();
        }
    }
    run.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
}

RasterHeader header_for(const TileProduct& t, double gsd_m, const char* channel, double nodata, RasterType type) {
    RasterHeader h;
    h.width = t.width;
    h.height = t.height;
    h.channel = channel;
    h.lon_min = t.lon_min;
    h.lat_min = t.lat_min;
    h.lon_max = t.lon_max;
    h.lat_max = t.lat_max;
    h.gsd_m = gsd_m;
    h.nodata = nodata;
    h.type = type;
    return h;
}

template <typename T>
data::Grid<T> mosaic(const MapResult& result, T fill, const data::Grid<T> TileProduct::*field) {
    data::Grid<T> out(1, result.world_height, result.world_width, fill);
    for (const auto& run : result.tiles) {
        if (!run.product) continue;
        const auto& p = *run.product;
        const auto& g = p.*field;
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) out.at(p.y0 + y, p.x0 + x) = g.at(y, x);
    }
    return out;
}

}  // namespace

MapResult run_map(const data::WorldState& world, const fusion::Ensemble& ensemble, const MapOptions& options) {
    if (options.workers < 1) throw Error("run_map: workers must be positive");
    ensemble.validate();
    const auto tiles = build_tile_index(world, options.tile_size);

    MapResult result;
    result.world_width = world.width();
    result.world_height = world.height();
    result.workers = options.workers;
    result.tiles.resize(tiles.size());

    const auto t0 = Clock::now();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tiles.size(); i = next++) run_tile(world, ensemble, tiles[i], options, result.tiles[i]);
    };
    const int extra = std::min<int>(options.workers, static_cast<int>(tiles.size())) - 1;
    std::vector<std::jthread> pool;
    for (int w = 0; w < extra; ++w) pool.emplace_back(worker);
    worker();
    pool.clear();
    result.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();

    for (const auto& run : result.tiles) {
        if (run.ok)
            result.pixels += static_cast<long>(run.product->width) * run.product->height;
        else
            ++result.failed;
    }
    return result;
}

std::filesystem::path tile_raster_path(const std::filesystem::path& dir, int tile_id, const std::string& channel) {
    return dir / ("tile_" + std::to_string(tile_id) + "." + channel + ".raster");
}

void write_tile_rasters(const std::filesystem::path& dir, const TileProduct& t, double gsd_m) {
    write_raster(tile_raster_path(dir, t.id, "height"),
                 header_for(t, gsd_m, "mean_height_m", kHeightNoData, RasterType::u8), t.mean_height.values());
    write_raster(tile_raster_path(dir, t.id, "std"), header_for(t, gsd_m, "std_height_m", kStdNoData, RasterType::f32),
                 t.std_height.values());
    write_raster(tile_raster_path(dir, t.id, "mask"), header_for(t, gsd_m, "mask_code", kHeightNoData, RasterType::u8),
                 t.mask.values());
}

void write_run_report(std::ostream& os, const MapResult& result) {
    for (const auto& run : result.tiles) {
        nlohmann::ordered_json j;
        j["type"] = "tile";
        j["id"] = run.id;
        j["ok"] = run.ok;
        j["attempts"] = run.attempts;
        j["seconds"] = run.seconds;
        if (!run.ok) j["error"] = run.error;
        if (run.product) {
            const auto& p = *run.product;
            j["x0"] = p.x0;
            j["y0"] = p.y0;
            j["width"] = p.width;
            j["height"] = p.height;
            j["orbits"] = p.orbits;
            j["acquisitions"] = p.acquisitions;
            j["partial"] = p.partial;
            j["fewer_images"] = p.fewer_images;
            j["all_invalid"] = p.all_invalid;
            j["valid_pixels"] = p.valid_pixels;
            j["render_s"] = p.timings.render_s;
            j["predict_s"] = p.timings.predict_s;
            j["fuse_s"] = p.timings.fuse_s;
            j["post_s"] = p.timings.post_s;
        }
        os << j.dump() << '\n';
    }
    nlohmann::ordered_json s;
    s["type"] = "summary";
    s["tiles"] = result.tiles.size();
    s["failed"] = result.failed;
    s["workers"] = result.workers;
    s["wall_s"] = result.wall_s;
    s["pixels"] = result.pixels;
    s["pixels_per_second"] = result.pixels_per_second();
    os << s.dump() << '\n';
}

data::Grid<std::uint8_t> mosaic_height(const MapResult& result) {
    return mosaic(result, kHeightNoData, &TileProduct::mean_height);
}

data::Grid<float> mosaic_std(const MapResult& result) { return mosaic(result, kStdNoData, &TileProduct::std_height); }

data::Grid<std::uint8_t> mosaic_mask(const MapResult& result) {
    return mosaic(result, static_cast<std::uint8_t>(MaskCode::no_observation), &TileProduct::mask);
}

}  // namespace canopy::tiler
