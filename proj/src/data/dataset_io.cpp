#include "canopy/data/dataset_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "canopy/numerics/binary_io.hpp"

namespace canopy::data {
namespace {

constexpr const char* kMagic = "canopy-dataset";
constexpr int kVersion = 1;

template <typename T>
T parse_field(std::istringstream& ls, const std::string& line) {
    T v{};
    if (!(ls >> v)) throw FormatError("dataset: malformed header line '" + line + "'");
    return v;
}

void write_record(std::ostream& os, const FootprintSample& s, bool validation) {
    const float head[kRecordHeaderFloats] = {static_cast<float>(s.center_x),
                                             static_cast<float>(s.center_y),
                                             s.label,
                                             static_cast<float>(static_cast<int>(s.scene_class)),
                                             s.cloudy ? 1.0f : 0.0f,
                                             s.snow ? 1.0f : 0.0f,
                                             validation ? 1.0f : 0.0f};
    io::write_f32_le(os, head);
    if (s.patch.size() != static_cast<std::size_t>(kPatchValues)) {
        throw FormatError("dataset: sample patch has " + std::to_string(s.patch.size()) + " values");
    }
    io::write_f32_le(os, s.patch);
}

}  // namespace

void write_dataset(std::ostream& os, const Dataset& ds) {
    std::ostringstream h;
    h.precision(std::numeric_limits<double>::max_digits10);
    h << kMagic << '\n' << "version " << kVersion << '\n';
    h << "train " << ds.train.size() << '\n' << "validation " << ds.validation.size() << '\n';
    h << "patch " << kPatchSize << ' ' << kInputChannels << '\n';
    h << "channels";
    for (const auto& n : channel_names()) h << ' ' << n;
    h << '\n';
    h << "world " << ds.world_seed << ' ' << ds.world.width << ' ' << ds.world.height << ' ' << ds.world.gsd_m << ' '
      << ds.world.origin_lon << ' ' << ds.world.origin_lat << ' ' << ds.world.reference_cloud_cover << ' '
      << ds.world.acquisitions_per_orbit << '\n';
    h << "footprints " << ds.sample_seed << ' ' << ds.footprint.disc_radius_px << ' '
      << ds.footprint.geolocation_sigma_m << '\n';
    h << "split " << ds.split.tile_size << ' ' << ds.split.validation_fraction << ' ' << ds.split.seed << '\n';
    h << "norm " << (ds.stats ? norm_stats_to_text(*ds.stats) : std::string("none")) << '\n';
    h << "record " << kRecordFloats << '\n' << "end\n";
    os << h.str();
    for (const auto& s : ds.train) write_record(os, s, false);
    for (const auto& s : ds.validation) write_record(os, s, true);
    if (!os) throw FormatError("dataset: write failed");
}

Dataset read_dataset(std::istream& is) {
    const auto lines = io::read_header_lines(is, "end");
    if (lines.empty() || lines[0] != kMagic) throw FormatError("dataset: bad magic");
    Dataset ds;
    std::size_t n_train = 0, n_val = 0;
    bool seen_record = false;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        const std::string& line = lines[i];
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "version") {
            if (parse_field<int>(ls, line) != kVersion) throw FormatError("dataset: unsupported version");
        } else if (key == "train") {
            n_train = parse_field<std::size_t>(ls, line);
        } else if (key == "validation") {
            n_val = parse_field<std::size_t>(ls, line);
        } else if (key == "patch") {
            if (parse_field<int>(ls, line) != kPatchSize || parse_field<int>(ls, line) != kInputChannels) {
                throw FormatError("dataset: unsupported patch layout");
            }
        } else if (key == "channels") {
            std::vector<std::string> names;
            std::string n;
            while (ls >> n) names.push_back(n);
            if (names != channel_names()) throw FormatError("dataset: unexpected channel list");
        } else if (key == "world") {
            ds.world_seed = parse_field<std::uint64_t>(ls, line);
            ds.world.width = parse_field<int>(ls, line);
            ds.world.height = parse_field<int>(ls, line);
            ds.world.gsd_m = parse_field<double>(ls, line);
            ds.world.origin_lon = parse_field<double>(ls, line);
            ds.world.origin_lat = parse_field<double>(ls, line);
            ds.world.reference_cloud_cover = parse_field<double>(ls, line);
            ds.world.acquisitions_per_orbit = parse_field<int>(ls, line);
        } else if (key == "footprints") {
            ds.sample_seed = parse_field<std::uint64_t>(ls, line);
            ds.footprint.disc_radius_px = parse_field<double>(ls, line);
            ds.footprint.geolocation_sigma_m = parse_field<double>(ls, line);
        } else if (key == "split") {
            ds.split.tile_size = parse_field<int>(ls, line);
            ds.split.validation_fraction = parse_field<double>(ls, line);
            ds.split.seed = parse_field<std::uint64_t>(ls, line);
        } else if (key == "norm") {
            const std::string rest = line.substr(line.find(' ') + 1);
            if (rest != "none") ds.stats = norm_stats_from_text(rest);
        } else if (key == "record") {
            if (parse_field<int>(ls, line) != kRecordFloats) throw FormatError("dataset: unexpected record size");
            seen_record = true;
        } else {
            throw FormatError("dataset: unknown header key '" + key + "'");
        }
    }
    if (!seen_record) throw FormatError("dataset: missing record line");
    ds.split.world_width = ds.world.width;
    ds.split.world_height = ds.world.height;

    const GeoTransform geo = GeoTransform::from_gsd(ds.world.origin_lon, ds.world.origin_lat, ds.world.gsd_m);
    std::vector<float> rec(kRecordFloats);
    for (std::size_t i = 0; i < n_train + n_val; ++i) {
        io::read_f32_le(is, rec);
        FootprintSample s;
        s.center_x = static_cast<int>(rec[0]);
        s.center_y = static_cast<int>(rec[1]);
        s.label = rec[2];
        s.scene_class = static_cast<SceneClass>(static_cast<int>(rec[3]));
        s.cloudy = rec[4] != 0.0f;
        s.snow = rec[5] != 0.0f;
        const bool validation = rec[6] != 0.0f;
        if (validation != (i >= n_train)) throw FormatError("dataset: records out of split order");
        s.lon = geo.lon(s.center_x);
        s.lat = geo.lat(s.center_y);
        s.patch.assign(rec.begin() + kRecordHeaderFloats, rec.end());
        (validation ? ds.validation : ds.train).push_back(std::move(s));
    }
    return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ostringstream os;
    write_dataset(os, ds);
    io::write_file_atomic(path, os.str());
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("dataset: cannot open " + path.string());
    return read_dataset(is);
}

}  // namespace canopy::data
