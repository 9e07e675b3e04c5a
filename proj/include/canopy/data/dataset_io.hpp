#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "canopy/data/footprints.hpp"
#include "canopy/data/normalization.hpp"
#include "canopy/data/split.hpp"

namespace canopy::data {

/// A split footprint dataset with everything needed to rebuild it.
struct Dataset {
    std::uint64_t world_seed = 0;
    WorldParams world;
    std::uint64_t sample_seed = 0;
    FootprintParams footprint;
    SplitSpec split;
    std::optional<NormStats> stats;
    std::vector<FootprintSample> train;
    std::vector<FootprintSample> validation;

    bool operator==(const Dataset&) const = default;
};

/// Text header followed by fixed-stride little-endian float32 records:
///
///   canopy-dataset
///   version 1
///   train <n>
///   validation <n>
///   patch <size> <channels>
///   channels <name> ...
///   world <seed> <width> <height> <gsd_m> <origin_lon> <origin_lat> <reference_cloud_cover> <acquisitions_per_orbit>
///   footprints <seed> <disc_radius_px> <geolocation_sigma_m>
///   split <tile_size> <validation_fraction> <seed>
///   norm <label_mean> <label_std> <mean_0> <std_0> ... | norm none
///   record <floats per record>
///   end
///
/// Each record is center_x, center_y, label, scene_class, cloudy, snow,
/// is_validation, then the patch. Train records come first. Longitude and
/// latitude are recomputed from the world transform on read.
void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

inline constexpr int kRecordHeaderFloats = 7;
inline constexpr int kRecordFloats = kRecordHeaderFloats + kPatchValues;

}  // namespace canopy::data
