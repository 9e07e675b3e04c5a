#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace canopy::cli {

struct FileRecord {
    std::string path;
    std::uintmax_t bytes = 0;
    std::string fnv1a64;  // hex digest of the contents
};

FileRecord record_file(const std::filesystem::path& path);

/// Everything needed to rerun a subcommand. `argv` is the resolved argument
/// list (defaults included) that `replay` parses again. Outputs are the
/// reproducible artifacts; diagnostics (timings, run reports) are listed
/// separately because they carry wall-clock values.
struct RunManifest {
    std::string tool_version;
    std::string subcommand;
    std::vector<std::string> argv;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    std::vector<FileRecord> inputs;
    std::vector<FileRecord> outputs;
    std::vector<std::string> diagnostics;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    double wall_s = 0.0;
    std::optional<std::string> replayed_from;
};

/// `<out>.manifest.json` next to the output file or directory.
std::filesystem::path manifest_path(const std::filesystem::path& out);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace canopy::cli
