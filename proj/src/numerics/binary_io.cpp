#include "canopy/numerics/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "canopy/numerics/error.hpp"

namespace canopy::io {
namespace {

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
}

}  // namespace

void write_f32_le(std::ostream& os, std::span<const float> values) {
    std::vector<char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(values[i]));
        std::memcpy(buf.data() + 4 * i, &bits, 4);
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw FormatError("write failed");
}

void read_f32_le(std::istream& is, std::span<float> out) {
    std::vector<char> buf(out.size() * 4);
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() != static_cast<std::streamsize>(buf.size())) throw FormatError("truncated float32 payload");
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, buf.data() + 4 * i, 4);
        out[i] = std::bit_cast<float>(to_le(bits));
    }
}

void write_u8(std::ostream& os, std::span<const std::uint8_t> values) {
    os.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size()));
    if (!os) throw FormatError("write failed");
}

void read_u8(std::istream& is, std::span<std::uint8_t> out) {
    is.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (is.gcount() != static_cast<std::streamsize>(out.size())) throw FormatError("truncated uint8 payload");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw FormatError("cannot open for writing: " + tmp.string());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!os) throw FormatError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> read_header_lines(std::istream& is, const std::string& terminator) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(is, line)) {
        lines.push_back(line);
        if (line == terminator) return lines;
        if (lines.size() > 100000) break;
    }
    throw FormatError("header not terminated by '" + terminator + "'");
}

}  // namespace canopy::io
