#include "canopy/tiler/selection.hpp"

#include <algorithm>
#include <numeric>

#include "canopy/numerics/error.hpp"

namespace canopy::tiler {

OrbitSelection select_orbits(const TileIndex& tile, int max_orbits) {
    if (tile.orbits.empty()) throw Error("select_orbits: tile " + std::to_string(tile.id) + " has no orbits");
    if (max_orbits < 1) throw Error("select_orbits: max_orbits must be positive");
    std::vector<int> order(tile.orbits.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto& oa = tile.orbits[static_cast<std::size_t>(a)];
        const auto& ob = tile.orbits[static_cast<std::size_t>(b)];
        if (oa.empty_pixels != ob.empty_pixels) return oa.empty_pixels < ob.empty_pixels;
        return oa.orbit < ob.orbit;
    });

    const std::size_t n = static_cast<std::size_t>(tile.width) * static_cast<std::size_t>(tile.height);
    std::vector<std::uint8_t> covered(n, 0);
    OrbitSelection sel;
    sel.partial = true;
    for (int idx : order) {
        if (static_cast<int>(sel.candidates.size()) == max_orbits) break;
        const auto& cov = tile.orbits[static_cast<std::size_t>(idx)].coverage.values();
        if (cov.size() != n) throw ShapeError("select_orbits", "coverage", static_cast<long>(n), static_cast<long>(cov.size()));
        for (std::size_t i = 0; i < n; ++i) covered[i] |= cov[i];
        sel.candidates.push_back(idx);
        if (std::all_of(covered.begin(), covered.end(), [](std::uint8_t c) { return c != 0; })) {
            sel.partial = false;
            break;
        }
    }
    return sel;
}

ImageSelection select_images(const OrbitCandidate& orbit, const DateWindow& window, int k) {
    if (k < 1) throw Error("select_images: k must be positive");
    ImageSelection sel;
    for (const auto& im : orbit.images)
        if (im.day_of_year >= window.first_day && im.day_of_year <= window.last_day) sel.images.push_back(im);
    if (sel.images.empty()) {
        throw Error("select_images: orbit " + std::to_string(orbit.orbit) + " has no image in days " +
                    std::to_string(window.first_day) + "-" + std::to_string(window.last_day));
    }
    std::stable_sort(sel.images.begin(), sel.images.end(), [](const ImageMeta& a, const ImageMeta& b) {
        if (a.cloud_fraction != b.cloud_fraction) return a.cloud_fraction < b.cloud_fraction;
        return a.day_of_year < b.day_of_year;
    });
    if (static_cast<int>(sel.images.size()) < k)
        sel.fewer_than_k = true;
    else
        sel.images.resize(static_cast<std::size_t>(k));
    return sel;
}

}  // namespace canopy::tiler
