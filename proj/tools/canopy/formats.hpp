#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "canopy/data/world.hpp"

namespace canopy::cli {

/// Seed and parameters of a synthetic world:
///
///   canopy-world
///   version 1
///   seed <seed>
///   size <width> <height>
///   gsd <meters>
///   origin <lon> <lat>
///   reference_cloud_cover <fraction>
///   acquisitions_per_orbit <n>
///   end
struct WorldSpec {
    std::uint64_t seed = 0;
    data::WorldParams params;
};

void write_world_spec(const std::filesystem::path& path, const WorldSpec& spec);
WorldSpec read_world_spec(const std::filesystem::path& path);

/// One row per (sample, member) in `all` mode, or per sample once fused.
struct PredictionRow {
    std::size_t sample = 0;
    int x = 0;
    int y = 0;
    double label = 0.0;
    int member = -1;  // -1 in fused files
    double mean = 0.0;
    double variance = 0.0;
};

/// Tab separated with a header line; numbers in shortest round-trip form.
void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows, bool fused);
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path, bool& fused);

/// Shortest decimal that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace canopy::cli
