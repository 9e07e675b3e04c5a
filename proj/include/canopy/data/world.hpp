#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "canopy/data/grid.hpp"

namespace canopy::data {

enum class SceneClass : std::uint8_t {
    vegetated = 0,
    not_vegetated = 1,
    water = 2,
    cloud = 3,
    snow = 4,
    built_up = 5,
    ice = 6,
};

const char* scene_class_name(SceneClass c);
/// Classes whose reference height is forced to 0 m.
bool zero_height_class(SceneClass c);
/// Classes written as no-data in map products.
bool masked_class(SceneClass c);

inline constexpr int kSpectralChannels = 12;
inline constexpr int kGeoChannels = 3;
inline constexpr int kInputChannels = kSpectralChannels + kGeoChannels;

/// Names of the 15 input channels in order.
const std::vector<std::string>& channel_names();

/// One overpass of an orbit. Clouds are drawn per pixel so that roughly
/// `cloud_cover` of the scene is obscured.
struct Acquisition {
    int id = 0;
    int orbit = 0;
    int day_of_year = 0;
    double cloud_cover = 0.0;
    /// Cloud-noise level above which a pixel is cloudy; set at generation so
    /// the world-wide cloudy fraction matches `cloud_cover`.
    double cloud_threshold = 1.0;

    bool operator==(const Acquisition&) const = default;
};

/// A north-south swath covering columns [x_begin, x_end) of the world.
struct Orbit {
    int id = 0;
    int x_begin = 0;
    int x_end = 0;
    std::vector<int> acquisitions;

    bool operator==(const Orbit&) const = default;
};

struct WorldParams {
    int width = 256;
    int height = 256;
    double gsd_m = 10.0;
    double origin_lon = 8.0;
    double origin_lat = 46.5;
    /// Cloud cover of the acquisition footprint patches are cut from.
    double reference_cloud_cover = 0.04;
    int acquisitions_per_orbit = 14;

    bool operator==(const WorldParams&) const = default;
};

/// Synthetic scene with known heights.
///
/// Land cover and heights come from smooth value-noise fields: forest stands
/// with 5-25 m canopy, sparse clusters reaching ~48 m, bare ground, lakes,
/// built-up patches and high snow/ice. Heights are 0 off vegetation.
///
/// Spectra follow a fixed map g(h, class) plus Gaussian noise whose standard
/// deviation grows with height, 0.004 + 0.008 * h/30. On vegetation, with
/// s = 1 - exp(-h/12) and t = 1 - exp(-h/30):
///
///   ch0  0.060 - 0.030 s        ch6  0.250 + 0.250 s
///   ch1  0.090 - 0.030 s        ch7  0.240 + 0.150 s + 0.100 t
///   ch2  0.120 - 0.080 s        ch8  0.300 + 0.050 s + 0.150 t
///   ch3  0.150 + 0.050 s        ch9  0.250 - 0.100 t
///   ch4  0.200 + 0.080 s        ch10 0.180 - 0.100 t
///   ch5  0.220 + 0.120 s        ch11 0.100 + texture
///
/// Other classes use flat signatures (see world.cpp). Channel 11 carries
/// class-independent texture only.
struct WorldState {
    WorldParams params;
    std::uint64_t seed = 0;
    GeoTransform geo;
    Grid<float> true_height;          // meters
    Grid<std::uint8_t> scene_class;   // land cover, SceneClass values
    Grid<float> spectral;             // 12 channels of the reference acquisition
    Grid<std::uint8_t> cloud;         // 1 where the reference acquisition is cloudy
    Acquisition reference;
    std::vector<Orbit> orbits;
    std::vector<Acquisition> acquisitions;

    /// The reference acquisition for kReferenceAcquisition, else by id.
    const Acquisition& acquisition(int id) const;

    int width() const { return params.width; }
    int height() const { return params.height; }
    SceneClass class_at(int x, int y) const { return static_cast<SceneClass>(scene_class.at(y, x)); }

    bool operator==(const WorldState&) const = default;
};

/// Deterministic per (seed, params). Throws when the extent is below 64x64.
WorldState generate_world(std::uint64_t seed, const WorldParams& params = {});

inline constexpr int kReferenceAcquisition = -1;

/// Spectral and geo channels of one acquisition over a window, with the
/// per-pixel validity (inside the swath and cloud free). Every pixel depends
/// only on (world seed, acquisition, pixel), so overlapping windows agree.
struct ImageWindow {
    int x0 = 0, y0 = 0;
    Grid<float> channels;         // kInputChannels
    Grid<std::uint8_t> valid;     // 1 = observed
};

ImageWindow render_window(const WorldState& world, int acquisition, int x0, int y0, int w, int h);

/// Cloud flag of one pixel in one acquisition.
bool cloudy(const WorldState& world, int acquisition, int x, int y);

/// Fraction of cloudy pixels of an acquisition over a window.
double cloud_fraction(const WorldState& world, int acquisition, int x0, int y0, int w, int h);

}  // namespace canopy::data
