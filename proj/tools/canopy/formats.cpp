#include "formats.hpp"

#include <charconv>
#include <sstream>

#include "canopy/numerics/binary_io.hpp"
#include "canopy/numerics/error.hpp"

namespace canopy::cli {

namespace {

constexpr const char* kMemberHeader = "sample\tx\ty\tlabel\tmember\tmean\tvariance";
constexpr const char* kFusedHeader = "sample\tx\ty\tlabel\tmean\tvariance";

template <typename T>
T expect_value(std::istringstream& in, const std::string& key) {
    T v{};
    if (!(in >> v)) throw FormatError("world spec: bad value for '" + key + "'");
    return v;
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_world_spec(const std::filesystem::path& path, const WorldSpec& s) {
    const auto& p = s.params;
    std::ostringstream os;
    os << "canopy-world\nversion 1\n"
       << "seed " << s.seed << "\n"
       << "size " << p.width << " " << p.height << "\n"
       << "gsd " << format_number(p.gsd_m) << "\n"
       << "origin " << format_number(p.origin_lon) << " " << format_number(p.origin_lat) << "\n"
       << "reference_cloud_cover " << format_number(p.reference_cloud_cover) << "\n"
       << "acquisitions_per_orbit " << p.acquisitions_per_orbit << "\n"
       << "end\n";
    io::write_file_atomic(path, os.str());
}

WorldSpec read_world_spec(const std::filesystem::path& path) {
    std::istringstream file(io::read_file(path));
    const auto lines = io::read_header_lines(file, "end");
    if (lines.size() < 2 || lines[0] != "canopy-world" || lines[1] != "version 1")
        throw FormatError("not a canopy-world file: " + path.string());
    WorldSpec s;
    for (std::size_t i = 2; i + 1 < lines.size(); ++i) {
        std::istringstream in(lines[i]);
        std::string key;
        in >> key;
        if (key == "seed") s.seed = expect_value<std::uint64_t>(in, key);
        else if (key == "size") {
            s.params.width = expect_value<int>(in, key);
            s.params.height = expect_value<int>(in, key);
        } else if (key == "gsd") s.params.gsd_m = expect_value<double>(in, key);
        else if (key == "origin") {
            s.params.origin_lon = expect_value<double>(in, key);
            s.params.origin_lat = expect_value<double>(in, key);
        } else if (key == "reference_cloud_cover") s.params.reference_cloud_cover = expect_value<double>(in, key);
        else if (key == "acquisitions_per_orbit") s.params.acquisitions_per_orbit = expect_value<int>(in, key);
        else throw FormatError("world spec: unknown key '" + key + "'");
    }
    return s;
}

void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRow>& rows, bool fused) {
    std::string out = fused ? kFusedHeader : kMemberHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.sample) + '\t' + std::to_string(r.x) + '\t' + std::to_string(r.y) + '\t' +
               format_number(r.label) + '\t';
        if (!fused) out += std::to_string(r.member) + '\t';
        out += format_number(r.mean) + '\t' + format_number(r.variance) + '\n';
    }
    io::write_file_atomic(path, out);
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path, bool& fused) {
    std::istringstream in(io::read_file(path));
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty predictions file: " + path.string());
    if (line == kFusedHeader) fused = true;
    else if (line == kMemberHeader) fused = false;
    else throw FormatError("unrecognized predictions header in " + path.string());
    std::vector<PredictionRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        PredictionRow r;
        fields >> r.sample >> r.x >> r.y >> r.label;
        if (!fused) fields >> r.member;
        fields >> r.mean >> r.variance;
        std::string rest;
        if (fields.fail() || (fields >> rest))
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
        rows.push_back(r);
    }
    return rows;
}

}  // namespace canopy::cli
