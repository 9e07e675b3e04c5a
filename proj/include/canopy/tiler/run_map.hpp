#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "canopy/tiler/process.hpp"

namespace canopy::tiler {

struct MapOptions {
    int tile_size = 64;
    int workers = 1;
    TileOptions tile;
    /// When set, each finished tile is written here as three rasters
    /// (see `tile_raster_path`).
    std::optional<std::filesystem::path> out_dir;
    /// Called before every attempt; throwing from it fails the attempt.
    /// Used to exercise the retry path.
    std::function<void(int tile_id, int attempt)> before_attempt;
};

struct TileRun {
    int id = 0;
    int attempts = 0;
    bool ok = false;
    std::string error;  // message of the last failure
    std::optional<TileProduct> product;
    double seconds = 0.0;
};

struct MapResult {
    std::vector<TileRun> tiles;  // ordered by tile id
    int world_width = 0;
    int world_height = 0;
    int workers = 0;
    double wall_s = 0.0;
    long pixels = 0;
    int failed = 0;

    double pixels_per_second() const { return wall_s > 0.0 ? static_cast<double>(pixels) / wall_s : 0.0; }
};

/// Processes every tile of `world` with a pool of `options.workers`
/// threads. A tile that throws is retried once and then recorded as failed;
/// the run continues. Products do not depend on the worker count.
MapResult run_map(const data::WorldState& world, const fusion::Ensemble& ensemble, const MapOptions& options = {});

/// `<dir>/tile_<id>.<channel>.raster` for channel "height", "std" or "mask".
std::filesystem::path tile_raster_path(const std::filesystem::path& dir, int tile_id, const std::string& channel);

void write_tile_rasters(const std::filesystem::path& dir, const TileProduct& tile, double gsd_m);

/// One JSON object per tile, then a summary object ("type": "summary").
void write_run_report(std::ostream& os, const MapResult& result);

/// Mosaics successful tiles into world-sized grids; pixels of failed tiles
/// are no-data.
data::Grid<std::uint8_t> mosaic_height(const MapResult& result);
data::Grid<float> mosaic_std(const MapResult& result);
/// Failed tiles are marked `MaskCode::no_observation`.
data::Grid<std::uint8_t> mosaic_mask(const MapResult& result);

}  // namespace canopy::tiler
