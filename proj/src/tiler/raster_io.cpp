#include "canopy/tiler/raster_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "canopy/numerics/binary_io.hpp"
#include "canopy/numerics/error.hpp"

namespace canopy::tiler {
namespace {

constexpr const char* kMagic = "canopy-raster";
constexpr int kVersion = 1;

void write_header(std::ostream& os, const RasterHeader& h, std::size_t count) {
    if (h.width <= 0 || h.height <= 0) throw Error("raster: extent must be positive");
    if (count != static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height)) {
        throw ShapeError("write_raster", "values", static_cast<long>(h.width) * h.height, static_cast<long>(count));
    }
    if (h.channel.empty() || h.channel.find_first_of(" \t\n") != std::string::npos) {
        throw Error("raster: channel name must be a non-empty token");
    }
    std::ostringstream s;
    s.precision(std::numeric_limits<double>::max_digits10);
    s << kMagic << '\n' << "version " << kVersion << '\n';
    s << "size " << h.width << ' ' << h.height << '\n';
    s << "channel " << h.channel << '\n';
    s << "bounds " << h.lon_min << ' ' << h.lat_min << ' ' << h.lon_max << ' ' << h.lat_max << '\n';
    s << "gsd " << h.gsd_m << '\n';
    s << "nodata " << h.nodata << '\n';
    s << "dtype " << raster_type_name(h.type) << '\n';
    s << "end\n";
    os << s.str();
}

RasterHeader parse_header(std::istream& is) {
    const auto lines = io::read_header_lines(is, "end");
    if (lines.empty() || lines[0] != kMagic) throw FormatError("raster: bad magic");
    RasterHeader h;
    bool seen_version = false, seen_size = false, seen_dtype = false;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        std::istringstream ls(lines[i]);
        std::string key;
        ls >> key;
        if (key == "version") {
            int v = 0;
            ls >> v;
            if (v != kVersion) throw FormatError("raster: unsupported version " + std::to_string(v));
            seen_version = true;
        } else if (key == "size") {
            ls >> h.width >> h.height;
            seen_size = true;
        } else if (key == "channel") {
            ls >> h.channel;
        } else if (key == "bounds") {
            ls >> h.lon_min >> h.lat_min >> h.lon_max >> h.lat_max;
        } else if (key == "gsd") {
            ls >> h.gsd_m;
        } else if (key == "nodata") {
            ls >> h.nodata;
        } else if (key == "dtype") {
            std::string t;
            ls >> t;
            if (t == "u8")
                h.type = RasterType::u8;
            else if (t == "f32")
                h.type = RasterType::f32;
            else
                throw FormatError("raster: unknown dtype '" + t + "'");
            seen_dtype = true;
        } else {
            throw FormatError("raster: unknown header key '" + key + "'");
        }
        if (ls.fail()) throw FormatError("raster: malformed header line '" + lines[i] + "'");
    }
    if (!seen_version || !seen_size || !seen_dtype) throw FormatError("raster: incomplete header");
    if (h.width <= 0 || h.height <= 0) throw FormatError("raster: extent must be positive");
    return h;
}

}  // namespace

const char* raster_type_name(RasterType t) { return t == RasterType::u8 ? "u8" : "f32"; }

void write_raster(std::ostream& os, const RasterHeader& header, std::span<const std::uint8_t> values) {
    if (header.type != RasterType::u8) throw Error("raster: header dtype is not u8");
    write_header(os, header, values.size());
    io::write_u8(os, values);
}

void write_raster(std::ostream& os, const RasterHeader& header, std::span<const float> values) {
    if (header.type != RasterType::f32) throw Error("raster: header dtype is not f32");
    write_header(os, header, values.size());
    io::write_f32_le(os, values);
}

Raster read_raster(std::istream& is) {
    Raster r;
    r.header = parse_header(is);
    const std::size_t n = static_cast<std::size_t>(r.header.width) * static_cast<std::size_t>(r.header.height);
    if (r.header.type == RasterType::u8) {
        r.u8.resize(n);
        io::read_u8(is, r.u8);
    } else {
        r.f32.resize(n);
        io::read_f32_le(is, r.f32);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("raster: trailing bytes after payload");
    return r;
}

void write_raster(const std::filesystem::path& path, const RasterHeader& header, std::span<const std::uint8_t> values) {
    std::ostringstream os;
    write_raster(os, header, values);
    io::write_file_atomic(path, os.str());
}

void write_raster(const std::filesystem::path& path, const RasterHeader& header, std::span<const float> values) {
    std::ostringstream os;
    write_raster(os, header, values);
    io::write_file_atomic(path, os.str());
}

Raster read_raster(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    return read_raster(is);
}

}  // namespace canopy::tiler
