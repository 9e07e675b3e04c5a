#include "canopy/data/footprints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "canopy/model/geo_encoding.hpp"

namespace canopy::data {

FootprintSample make_sample(const WorldState& world, int cx, int cy, double dx_px, double dy_px,
                            double disc_radius_px) {
    constexpr int half = kPatchSize / 2;
    if (cx < half || cy < half || cx + half >= world.width() || cy + half >= world.height()) {
        throw Error("footprint: patch around (" + std::to_string(cx) + "," + std::to_string(cy) +
                    ") leaves the world");
    }
    if (disc_radius_px < 0.0) throw Error("footprint: negative disc radius");

    FootprintSample s;
    s.center_x = cx;
    s.center_y = cy;
    s.lon = world.geo.lon(cx);
    s.lat = world.geo.lat(cy);
    s.scene_class = world.class_at(cx, cy);

    s.patch.resize(kPatchValues);
    const std::size_t plane = kPatchSize * kPatchSize;
    for (int y = 0; y < kPatchSize; ++y) {
        const int wy = cy - half + y;
        for (int x = 0; x < kPatchSize; ++x) {
            const int wx = cx - half + x;
            const std::size_t at = static_cast<std::size_t>(y) * kPatchSize + x;
            for (int c = 0; c < kSpectralChannels; ++c) s.patch[c * plane + at] = world.spectral.at(c, wy, wx);
            const auto geo = model::geo_channels(world.geo.lon(wx), world.geo.lat(wy));
            for (int c = 0; c < kGeoChannels; ++c) s.patch[(kSpectralChannels + c) * plane + at] = geo[c];
            s.cloudy = s.cloudy || world.cloud.at(wy, wx) != 0;
            s.snow = s.snow || world.class_at(wx, wy) == SceneClass::snow;
        }
    }

    if (zero_height_class(s.scene_class)) {
        s.label = 0.0f;
        return s;
    }
    const double px = cx + 0.5 + dx_px, py = cy + 0.5 + dy_px;
    const int r = static_cast<int>(std::ceil(disc_radius_px)) + 1;
    const int ix = static_cast<int>(std::floor(px)), iy = static_cast<int>(std::floor(py));
    float best = 0.0f;
    bool any = false;
    for (int y = iy - r; y <= iy + r; ++y) {
        for (int x = ix - r; x <= ix + r; ++x) {
            if (x < 0 || y < 0 || x >= world.width() || y >= world.height()) continue;
            const double ddx = x + 0.5 - px, ddy = y + 0.5 - py;
            // The pixel containing the displaced center always counts.
            const bool inside = (x == ix && y == iy) || ddx * ddx + ddy * ddy <= disc_radius_px * disc_radius_px;
            if (!inside) continue;
            best = any ? std::max(best, world.true_height.at(y, x)) : world.true_height.at(y, x);
            any = true;
        }
    }
    s.label = best;
    return s;
}

std::vector<FootprintSample> filter_quality(std::vector<FootprintSample> samples) {
    std::erase_if(samples, [](const FootprintSample& s) { return s.flagged(); });
    return samples;
}

std::vector<FootprintSample> sample_footprints(const WorldState& world, std::size_t n, std::uint64_t seed,
                                               const FootprintParams& params) {
    if (n < 1) throw Error("footprints: n must be >= 1");
    if (params.geolocation_sigma_m < 0.0) throw Error("footprints: negative geolocation sigma");
    constexpr int half = kPatchSize / 2;
    const int w = world.width() - 2 * half, h = world.height() - 2 * half;
    std::vector<std::uint32_t> order(static_cast<std::size_t>(w) * h);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const double sigma_px = params.geolocation_sigma_m / world.params.gsd_m;
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::vector<FootprintSample> out;
    out.reserve(n);
    for (std::uint32_t idx : order) {
        const int cx = half + static_cast<int>(idx % static_cast<std::uint32_t>(w));
        const int cy = half + static_cast<int>(idx / static_cast<std::uint32_t>(w));
        // Draw the jitter for every candidate so the accepted set does not
        // shift the randomness of later candidates.
        const double dx = sigma_px * jitter(rng), dy = sigma_px * jitter(rng);
        FootprintSample s = make_sample(world, cx, cy, dx, dy, params.disc_radius_px);
        if (s.flagged()) continue;
        out.push_back(std::move(s));
        if (out.size() == n) return out;
    }
    throw Error("footprints: requested " + std::to_string(n) + " samples but only " + std::to_string(out.size()) +
                " usable locations exist");
}

}  // namespace canopy::data
