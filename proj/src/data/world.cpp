#include "canopy/data/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "canopy/model/geo_encoding.hpp"

namespace canopy::data {
namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                   std::uint64_t d = 0) {
    std::uint64_t h = mix(seed);
    h = mix(h ^ a);
    h = mix(h ^ b);
    h = mix(h ^ c);
    return mix(h ^ d);
}

double uniform(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

double normal(std::uint64_t h) {
    const double u1 = 1.0 - uniform(h);
    const double u2 = uniform(mix(h));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Noise layers. Each layer is an independent lattice.
enum Layer : std::uint64_t {
    kForest = 1,
    kWater,
    kBuilt,
    kAlpine,
    kCanopy,
    kCluster,
    kCrown,
    kTexture,
    kSpectralNoise,
    kCloud,
    kAcquisitionMeta,
};

double lattice(std::uint64_t seed, std::uint64_t layer, long ix, long iy) {
    return uniform(hash(seed, layer, static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy)));
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(std::uint64_t seed, std::uint64_t layer, double x, double y) {
    const double fx = std::floor(x), fy = std::floor(y);
    const long ix = static_cast<long>(fx), iy = static_cast<long>(fy);
    const double tx = smooth(x - fx), ty = smooth(y - fy);
    const double a = lattice(seed, layer, ix, iy), b = lattice(seed, layer, ix + 1, iy);
    const double c = lattice(seed, layer, ix, iy + 1), d = lattice(seed, layer, ix + 1, iy + 1);
    return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
}

// Three octaves, in [0, 1].
double fbm(std::uint64_t seed, std::uint64_t layer, double x, double y, double scale) {
    double sum = 0.0, amp = 1.0, norm = 0.0, f = 1.0 / scale;
    for (int o = 0; o < 3; ++o) {
        sum += amp * value_noise(seed, layer * 16 + o, x * f, y * f);
        norm += amp;
        amp *= 0.5;
        f *= 2.0;
    }
    return sum / norm;
}

double ramp(double v, double lo, double hi) { return std::clamp((v - lo) / (hi - lo), 0.0, 1.0); }

// Flat signatures of the non-vegetated classes, channels 0-10.
constexpr std::array<std::array<float, 11>, 7> kSignature = {{
    {},  // vegetated: computed from height
    {0.10f, 0.14f, 0.18f, 0.20f, 0.22f, 0.24f, 0.26f, 0.27f, 0.28f, 0.32f, 0.28f},
    {0.08f, 0.07f, 0.05f, 0.04f, 0.03f, 0.02f, 0.02f, 0.02f, 0.02f, 0.01f, 0.01f},
    {0.55f, 0.55f, 0.55f, 0.55f, 0.55f, 0.55f, 0.55f, 0.55f, 0.55f, 0.45f, 0.40f},
    {0.85f, 0.85f, 0.83f, 0.80f, 0.78f, 0.75f, 0.72f, 0.70f, 0.60f, 0.15f, 0.10f},
    {0.14f, 0.16f, 0.18f, 0.19f, 0.20f, 0.21f, 0.22f, 0.22f, 0.23f, 0.26f, 0.24f},
    {0.70f, 0.70f, 0.68f, 0.65f, 0.60f, 0.55f, 0.50f, 0.48f, 0.40f, 0.05f, 0.04f},
}};

std::array<double, 11> vegetation_signature(double h) {
    const double s = 1.0 - std::exp(-h / 12.0);
    const double t = 1.0 - std::exp(-h / 30.0);
    return {0.060 - 0.030 * s, 0.090 - 0.030 * s, 0.120 - 0.080 * s, 0.150 + 0.050 * s,
            0.200 + 0.080 * s, 0.220 + 0.120 * s, 0.250 + 0.250 * s, 0.240 + 0.150 * s + 0.100 * t,
            0.300 + 0.050 * s + 0.150 * t, 0.250 - 0.100 * t, 0.180 - 0.100 * t};
}

double cloud_noise(std::uint64_t seed, int acquisition, int x, int y) {
    return fbm(seed, kCloud * 1024 + static_cast<std::uint64_t>(acquisition + 1), x, y, 36.0);
}

// Level exceeded by `cover` of the world, estimated on a regular subsample.
double cloud_threshold(std::uint64_t seed, int acquisition, const WorldParams& p, double cover) {
    if (cover <= 0.0) return 2.0;
    std::vector<double> v;
    for (int y = 0; y < p.height; y += 2) {
        for (int x = 0; x < p.width; x += 2) v.push_back(cloud_noise(seed, acquisition, x, y));
    }
    std::sort(v.begin(), v.end());
    const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>((1.0 - cover) * v.size()));
    return v[k];
}

void surface_at(std::uint64_t seed, int x, int y, SceneClass& cls, float& height) {
    const double alpine = fbm(seed, kAlpine, x, y, 90.0);
    const double water = fbm(seed, kWater, x, y, 60.0);
    const double built = fbm(seed, kBuilt, x, y, 14.0);
    const double forest = fbm(seed, kForest, x, y, 45.0);
    height = 0.0f;
    if (alpine > 0.74) {
        cls = alpine > 0.78 ? SceneClass::ice : SceneClass::snow;
    } else if (water < 0.27) {
        cls = SceneClass::water;
    } else if (built > 0.76) {
        cls = SceneClass::built_up;
    } else if (forest < 0.42) {
        cls = SceneClass::not_vegetated;
    } else {
        cls = SceneClass::vegetated;
        const double canopy = fbm(seed, kCanopy, x, y, 28.0);
        const double cluster = fbm(seed, kCluster, x, y, 16.0);
        double h = 4.0 + 21.0 * ramp(canopy, 0.3, 0.7);
        h += 23.0 * ramp(cluster, 0.62, 0.74);
        h *= 0.35 + 0.65 * ramp(forest, 0.42, 0.50);  // thinning toward stand edges
        h *= 0.85 + 0.30 * uniform(hash(seed, kCrown, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)));
        height = static_cast<float>(std::max(h, 0.0));
    }
}

bool in_swath(const WorldState& w, int acquisition, int x) {
    if (acquisition == kReferenceAcquisition) return true;
    const Orbit& o = w.orbits.at(static_cast<std::size_t>(w.acquisition(acquisition).orbit));
    return x >= o.x_begin && x < o.x_end;
}

}  // namespace

const char* scene_class_name(SceneClass c) {
    switch (c) {
        case SceneClass::vegetated: return "vegetated";
        case SceneClass::not_vegetated: return "not_vegetated";
        case SceneClass::water: return "water";
        case SceneClass::cloud: return "cloud";
        case SceneClass::snow: return "snow";
        case SceneClass::built_up: return "built_up";
        case SceneClass::ice: return "ice";
    }
    return "unknown";
}

bool zero_height_class(SceneClass c) { return c == SceneClass::not_vegetated || c == SceneClass::water; }

bool masked_class(SceneClass c) {
    return c == SceneClass::built_up || c == SceneClass::snow || c == SceneClass::ice || c == SceneClass::water;
}

const std::vector<std::string>& channel_names() {
    static const std::vector<std::string> names = {"b01", "b02", "b03", "b04", "b05", "b06", "b07", "b08",
                                                   "b09", "b10", "b11", "b12", "geo_sin_lon", "geo_cos_lon",
                                                   "geo_lat"};
    return names;
}

const Acquisition& WorldState::acquisition(int id) const {
    if (id == kReferenceAcquisition) return reference;
    if (id < 0 || static_cast<std::size_t>(id) >= acquisitions.size()) {
        throw Error("world: no acquisition " + std::to_string(id));
    }
    return acquisitions[static_cast<std::size_t>(id)];
}

bool cloudy(const WorldState& world, int acquisition, int x, int y) {
    return cloud_noise(world.seed, acquisition, x, y) > world.acquisition(acquisition).cloud_threshold;
}

double cloud_fraction(const WorldState& world, int acquisition, int x0, int y0, int w, int h) {
    if (w < 1 || h < 1) throw Error("cloud fraction: empty window");
    std::size_t n = 0;
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) n += cloudy(world, acquisition, x, y) ? 1 : 0;
    }
    return static_cast<double>(n) / (static_cast<double>(w) * h);
}

ImageWindow render_window(const WorldState& world, int acquisition, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > world.width() || y0 + h > world.height()) {
        throw Error("render: window outside the world");
    }
    const Acquisition& acq = world.acquisition(acquisition);
    const std::uint64_t key = static_cast<std::uint64_t>(acquisition + 1);
    ImageWindow out;
    out.x0 = x0;
    out.y0 = y0;
    out.channels = Grid<float>(kInputChannels, h, w, 0.0f);
    out.valid = Grid<std::uint8_t>(1, h, w, 0);
    for (int y = 0; y < h; ++y) {
        const int wy = y0 + y;
        for (int x = 0; x < w; ++x) {
            const int wx = x0 + x;
            const auto geo = model::geo_channels(world.geo.lon(wx), world.geo.lat(wy));
            for (int c = 0; c < kGeoChannels; ++c) out.channels.at(kSpectralChannels + c, y, x) = geo[c];
            if (!in_swath(world, acquisition, wx)) continue;  // no data: zeros

            const bool cloud = cloud_noise(world.seed, acquisition, wx, wy) > acq.cloud_threshold;
            const SceneClass cls = cloud ? SceneClass::cloud : world.class_at(wx, wy);
            const double hgt = cloud ? 0.0 : world.true_height.at(wy, wx);
            std::array<double, 11> sig{};
            if (cls == SceneClass::vegetated) {
                sig = vegetation_signature(hgt);
            } else {
                const auto& f = kSignature[static_cast<std::size_t>(cls)];
                std::copy(f.begin(), f.end(), sig.begin());
            }
            const double sigma = 0.004 + 0.008 * hgt / 30.0;
            const auto ux = static_cast<std::uint64_t>(wx), uy = static_cast<std::uint64_t>(wy);
            for (int c = 0; c < 11; ++c) {
                const double n = normal(hash(world.seed, kSpectralNoise, key, uy * 65536 + ux, c));
                out.channels.at(c, y, x) = static_cast<float>(sig[c] + sigma * n);
            }
            const double tex = fbm(world.seed, kTexture, wx, wy, 3.0);
            out.channels.at(11, y, x) = static_cast<float>(0.1 + 0.05 * tex +
                                                           sigma * normal(hash(world.seed, kSpectralNoise, key,
                                                                               uy * 65536 + ux, 11)));
            out.valid.at(y, x) = cloud ? 0 : 1;
        }
    }
    return out;
}

WorldState generate_world(std::uint64_t seed, const WorldParams& params) {
    if (params.width < 64 || params.height < 64) {
        throw Error("world: extent must be at least 64x64, got " + std::to_string(params.width) + "x" +
                    std::to_string(params.height));
    }
    if (params.width > 65536 || params.height > 65536) throw Error("world: extent too large");
    if (params.acquisitions_per_orbit < 1) throw Error("world: need at least one acquisition per orbit");

    WorldState w;
    w.params = params;
    w.seed = seed;
    w.geo = GeoTransform::from_gsd(params.origin_lon, params.origin_lat, params.gsd_m);
    w.true_height = Grid<float>(1, params.height, params.width, 0.0f);
    w.scene_class = Grid<std::uint8_t>(1, params.height, params.width, 0);
    for (int y = 0; y < params.height; ++y) {
        for (int x = 0; x < params.width; ++x) {
            SceneClass cls;
            float h;
            surface_at(seed, x, y, cls, h);
            w.scene_class.at(y, x) = static_cast<std::uint8_t>(cls);
            w.true_height.at(y, x) = h;
        }
    }

    // Three overlapping swaths; the middle one fills the seam of the outer two.
    const int W = params.width;
    const std::array<std::pair<double, double>, 3> swaths = {{{0.0, 0.6}, {0.55, 1.0}, {0.3, 0.7}}};
    int next_id = 0;
    for (int o = 0; o < 3; ++o) {
        Orbit orbit;
        orbit.id = o;
        orbit.x_begin = static_cast<int>(std::lround(swaths[o].first * W));
        orbit.x_end = static_cast<int>(std::lround(swaths[o].second * W));
        for (int k = 0; k < params.acquisitions_per_orbit; ++k) {
            Acquisition a;
            a.id = next_id++;
            a.orbit = o;
            a.day_of_year = 95 + 13 * k + 4 * o;
            a.cloud_cover = 0.8 * uniform(hash(seed, kAcquisitionMeta, static_cast<std::uint64_t>(a.id)));
            a.cloud_threshold = cloud_threshold(seed, a.id, params, a.cloud_cover);
            orbit.acquisitions.push_back(a.id);
            w.acquisitions.push_back(a);
        }
        w.orbits.push_back(std::move(orbit));
    }
    w.reference.id = kReferenceAcquisition;
    w.reference.orbit = -1;
    w.reference.day_of_year = 196;
    w.reference.cloud_cover = params.reference_cloud_cover;
    w.reference.cloud_threshold = cloud_threshold(seed, kReferenceAcquisition, params, params.reference_cloud_cover);

    ImageWindow ref = render_window(w, kReferenceAcquisition, 0, 0, params.width, params.height);
    w.spectral = Grid<float>(kSpectralChannels, params.height, params.width);
    std::copy(ref.channels.values().begin(), ref.channels.values().begin() + w.spectral.values().size(),
              w.spectral.values().begin());
    w.cloud = Grid<std::uint8_t>(1, params.height, params.width, 0);
    for (std::size_t i = 0; i < w.cloud.values().size(); ++i) w.cloud.values()[i] = ref.valid.values()[i] ? 0 : 1;
    return w;
}

}  // namespace canopy::data
