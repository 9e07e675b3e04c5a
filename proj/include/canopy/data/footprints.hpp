#pragma once

#include <cstdint>
#include <vector>

#include "canopy/data/world.hpp"

namespace canopy::data {

inline constexpr int kPatchSize = 15;
inline constexpr int kPatchValues = kInputChannels * kPatchSize * kPatchSize;

/// One sparse reference observation: a 15x15 input patch centered on the
/// labeled pixel.
struct FootprintSample {
    std::vector<float> patch;  // [kInputChannels][15][15], spectral then geo
    float label = 0.0f;        // meters, at the patch center
    int center_x = 0;          // world pixel holding the footprint center
    int center_y = 0;
    double lon = 0.0;          // of the center pixel
    double lat = 0.0;
    SceneClass scene_class = SceneClass::vegetated;
    bool cloudy = false;       // any cloud in the patch
    bool snow = false;         // any snow in the patch

    bool flagged() const { return cloudy || snow; }
    bool operator==(const FootprintSample&) const = default;
};

struct FootprintParams {
    /// Disc radius in pixels; 1.25 px is a 25 m footprint at 10 m.
    double disc_radius_px = 1.25;
    /// Standard deviation of the footprint's horizontal position error.
    double geolocation_sigma_m = 5.0;

    bool operator==(const FootprintParams&) const = default;
};

/// Builds the sample whose footprint is nominally centered on pixel
/// (cx, cy). The label is the tallest true height within the disc around the
/// displaced center (cx + 0.5 + dx, cy + 0.5 + dy), and 0 when the pixel's
/// class is not_vegetated or water. The patch must fit inside the world.
FootprintSample make_sample(const WorldState& world, int cx, int cy, double dx_px, double dy_px,
                            double disc_radius_px);

/// Draws `n` footprints at distinct pixels, dropping candidates whose patch
/// contains cloud or snow. Throws when fewer than `n` usable pixels exist.
std::vector<FootprintSample> sample_footprints(const WorldState& world, std::size_t n, std::uint64_t seed,
                                               const FootprintParams& params = {});

/// Removes exactly the samples flagged cloudy or snow, keeping order.
std::vector<FootprintSample> filter_quality(std::vector<FootprintSample> samples);

}  // namespace canopy::data
