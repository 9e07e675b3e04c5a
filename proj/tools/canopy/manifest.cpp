#include "manifest.hpp"

#include <cstdio>

#include "canopy/numerics/binary_io.hpp"
#include "canopy/numerics/error.hpp"

namespace canopy::cli {

namespace {

nlohmann::ordered_json to_json(const FileRecord& r) {
    return {{"path", r.path}, {"bytes", r.bytes}, {"fnv1a64", r.fnv1a64}};
}

FileRecord file_from_json(const nlohmann::json& j) {
    return {j.at("path").get<std::string>(), j.at("bytes").get<std::uintmax_t>(), j.at("fnv1a64").get<std::string>()};
}

}  // namespace

FileRecord record_file(const std::filesystem::path& path) {
    const std::string bytes = io::read_file(path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
    return {path.string(), bytes.size(), hex};
}

std::filesystem::path manifest_path(const std::filesystem::path& out) {
    auto p = out;
    if (!p.has_filename()) p = p.parent_path();
    return p.string() + ".manifest.json";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
    nlohmann::ordered_json j;
    j["tool"] = "canopy";
    j["version"] = m.tool_version;
    j["subcommand"] = m.subcommand;
    j["argv"] = m.argv;
    j["config"] = m.config;
    j["seeds"] = m.seeds;
    j["inputs"] = nlohmann::ordered_json::array();
    for (const auto& r : m.inputs) j["inputs"].push_back(to_json(r));
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& r : m.outputs) j["outputs"].push_back(to_json(r));
    j["diagnostics"] = m.diagnostics;
    j["summary"] = m.summary;
    j["wall_s"] = m.wall_s;
    if (m.replayed_from) j["replayed_from"] = *m.replayed_from;
    io::write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
        if (j.at("tool") != "canopy") throw FormatError("not a canopy manifest");
        RunManifest m;
        m.tool_version = j.at("version").get<std::string>();
        m.subcommand = j.at("subcommand").get<std::string>();
        m.argv = j.at("argv").get<std::vector<std::string>>();
        m.config = j.at("config");
        m.seeds = j.at("seeds");
        for (const auto& r : j.at("inputs")) m.inputs.push_back(file_from_json(r));
        for (const auto& r : j.at("outputs")) m.outputs.push_back(file_from_json(r));
        m.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        m.summary = j.at("summary");
        m.wall_s = j.at("wall_s").get<double>();
        if (j.contains("replayed_from")) m.replayed_from = j["replayed_from"].get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace canopy::cli
