#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "canopy/data/grid.hpp"
#include "canopy/data/world.hpp"
#include "canopy/fusion/ensemble.hpp"
#include "canopy/fusion/fuse.hpp"
#include "canopy/fusion/predict.hpp"
#include "canopy/tiler/selection.hpp"

namespace canopy::tiler {

inline constexpr std::uint8_t kHeightNoData = 255;
inline constexpr std::uint8_t kMaxHeight = 254;
inline constexpr float kStdNoData = -1.0f;

/// Why a pixel of a map product is no-data.
enum class MaskCode : std::uint8_t {
    valid = 0,
    land_cover = 1,      // built-up, snow, ice or water
    no_observation = 2,  // no cloud-free date covered the pixel
};

struct TileOptions {
    int max_orbits = 2;
    int images_per_orbit = 10;
    DateWindow window;
    fusion::MemberMode mode = fusion::MemberMode::assigned;
};

struct StageTimings {
    double render_s = 0.0;
    double predict_s = 0.0;
    double fuse_s = 0.0;
    double post_s = 0.0;
};

struct TileProduct {
    int id = 0;
    int x0 = 0;
    int y0 = 0;
    int width = 0;
    int height = 0;
    double lon_min = 0.0, lat_min = 0.0, lon_max = 0.0, lat_max = 0.0;
    data::Grid<std::uint8_t> mean_height;  // meters, kHeightNoData where masked
    data::Grid<float> std_height;          // meters, kStdNoData where masked
    data::Grid<std::uint8_t> mask;         // MaskCode
    std::vector<int> orbits;
    std::vector<int> acquisitions;
    bool partial = false;         // selected orbits leave pixels uncovered
    bool fewer_images = false;    // some orbit had fewer than k images
    bool all_invalid = false;     // every pixel is no-data
    long valid_pixels = 0;
    StageTimings timings;
};

/// Round to the nearest meter, clamped to [0, 254].
std::uint8_t quantize_height(double meters);

/// Halo that makes interior pixels independent of the window they are
/// computed in: the network's receptive radius.
int halo_for(const fusion::Ensemble& ensemble);

/// Renders every acquisition over the region grown by `halo` (clipped to
/// the world), predicts with the member each acquisition is assigned to
/// (or all members), fuses and crops back to the region. Clipping at the
/// world edge reproduces the zero padding of whole-world inference.
fusion::FusedPrediction predict_region(const data::WorldState& world, const fusion::Ensemble& ensemble,
                                       std::span<const int> acquisitions, int x0, int y0, int width, int height,
                                       int halo, fusion::MemberMode mode = fusion::MemberMode::assigned,
                                       StageTimings* timings = nullptr);

/// Selects orbits and images, predicts and fuses the tile, masks land-cover
/// classes and quantizes. Deterministic per (world, ensemble, tile, options).
TileProduct process_tile(const data::WorldState& world, const fusion::Ensemble& ensemble, const TileIndex& tile,
                         const TileOptions& options = {});

}  // namespace canopy::tiler
