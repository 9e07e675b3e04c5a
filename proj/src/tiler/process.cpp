#include "canopy/tiler/process.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "canopy/numerics/error.hpp"

namespace canopy::tiler {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

std::uint8_t quantize_height(double meters) {
    if (!std::isfinite(meters)) throw NumericError("quantize_height: non-finite height");
    const double r = std::clamp(std::nearbyint(meters), 0.0, static_cast<double>(kMaxHeight));
    return static_cast<std::uint8_t>(r);
}

int halo_for(const fusion::Ensemble& ensemble) { return model::receptive_radius(ensemble.config()); }

fusion::FusedPrediction predict_region(const data::WorldState& world, const fusion::Ensemble& ensemble,
                                       std::span<const int> acquisitions, int x0, int y0, int width, int height,
                                       int halo, fusion::MemberMode mode, StageTimings* timings) {
    if (acquisitions.empty()) throw Error("predict_region: no acquisitions");
    if (halo < 0) throw Error("predict_region: negative halo");
    if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > world.width() || y0 + height > world.height()) {
        throw Error("predict_region: region outside the world");
    }
    const int wx0 = std::max(0, x0 - halo), wy0 = std::max(0, y0 - halo);
    const int wx1 = std::min(world.width(), x0 + width + halo), wy1 = std::min(world.height(), y0 + height + halo);

    auto t0 = Clock::now();
    const auto table = fusion::assign_members(static_cast<int>(world.acquisitions.size()), ensemble.size(),
                                              ensemble.assignment_seed);
    std::vector<fusion::InputImage> images;
    std::vector<int> members;
    for (int id : acquisitions) {
        auto win = data::render_window(world, id, wx0, wy0, wx1 - wx0, wy1 - wy0);
        images.push_back({std::move(win.channels), std::move(win.valid), id});
        members.push_back(id == data::kReferenceAcquisition ? 0 : table.at(static_cast<std::size_t>(id)));
    }
    if (timings) timings->render_s += seconds_since(t0);

    t0 = Clock::now();
    const auto stack = fusion::predict_tile(ensemble, images, mode, members);
    if (timings) timings->predict_s += seconds_since(t0);

    t0 = Clock::now();
    const auto fused = fusion::fuse(stack);
    fusion::FusedPrediction out{fused.mean.crop(x0 - wx0, y0 - wy0, width, height),
                                fused.variance.crop(x0 - wx0, y0 - wy0, width, height),
                                fused.valid.crop(x0 - wx0, y0 - wy0, width, height)};
    if (timings) timings->fuse_s += seconds_since(t0);
    return out;
}

TileProduct process_tile(const data::WorldState& world, const fusion::Ensemble& ensemble, const TileIndex& tile,
                         const TileOptions& options) {
    TileProduct p;
    p.id = tile.id;
    p.x0 = tile.x0;
    p.y0 = tile.y0;
    p.width = tile.width;
    p.height = tile.height;
    p.lon_min = tile.lon_min;
    p.lat_min = tile.lat_min;
    p.lon_max = tile.lon_max;
    p.lat_max = tile.lat_max;

    const auto orbit_sel = select_orbits(tile, options.max_orbits);
    p.partial = orbit_sel.partial;
    for (int idx : orbit_sel.candidates) {
        const auto& cand = tile.orbits[static_cast<std::size_t>(idx)];
        p.orbits.push_back(cand.orbit);
        const auto img_sel = select_images(cand, options.window, options.images_per_orbit);
        p.fewer_images = p.fewer_images || img_sel.fewer_than_k;
        for (const auto& im : img_sel.images) p.acquisitions.push_back(im.acquisition);
    }

    const auto fused = predict_region(world, ensemble, p.acquisitions, tile.x0, tile.y0, tile.width, tile.height,
                                      halo_for(ensemble), options.mode, &p.timings);

    const auto t0 = Clock::now();
    p.mean_height = data::Grid<std::uint8_t>(1, tile.height, tile.width, kHeightNoData);
    p.std_height = data::Grid<float>(1, tile.height, tile.width, kStdNoData);
    p.mask = data::Grid<std::uint8_t>(1, tile.height, tile.width, static_cast<std::uint8_t>(MaskCode::valid));
    for (int y = 0; y < tile.height; ++y) {
        for (int x = 0; x < tile.width; ++x) {
            if (data::masked_class(world.class_at(tile.x0 + x, tile.y0 + y))) {
                p.mask.at(y, x) = static_cast<std::uint8_t>(MaskCode::land_cover);
            } else if (!fused.valid.at(y, x)) {
                p.mask.at(y, x) = static_cast<std::uint8_t>(MaskCode::no_observation);
            } else {
                p.mean_height.at(y, x) = quantize_height(fused.mean.at(y, x));
                p.std_height.at(y, x) = static_cast<float>(std::sqrt(fused.variance.at(y, x)));
                ++p.valid_pixels;
            }
        }
    }
    p.all_invalid = p.valid_pixels == 0;
    p.timings.post_s = seconds_since(t0);
    return p;
}

}  // namespace canopy::tiler
