#include "canopy/numerics/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "canopy/numerics/binary_io.hpp"

namespace canopy::numerics {
namespace {

constexpr const char* kMagic = "canopy-checkpoint";

void check_token(const std::string& s, const char* what) {
    if (s.empty() || s.find_first_of(" \t\r\n") != std::string::npos) {
        throw FormatError(std::string("checkpoint ") + what + " must be a non-empty token without whitespace: '" +
                          s + "'");
    }
}

}  // namespace

std::string Checkpoint::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return {};
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
    for (auto& [k, v] : metadata) {
        if (k == key) {
            v = value;
            return;
        }
    }
    metadata.emplace_back(key, value);
}

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
    os << kMagic << '\n'
       << "version " << Checkpoint::kFormatVersion << '\n'
       << "seed " << ckpt.seed << '\n'
       << "step " << ckpt.step << '\n';
    for (const auto& [k, v] : ckpt.metadata) {
        check_token(k, "metadata key");
        if (v.find('\n') != std::string::npos) throw FormatError("checkpoint metadata value contains a newline");
        os << "meta " << k << ' ' << v << '\n';
    }
    for (const auto& t : ckpt.tensors) {
        check_token(t.name, "tensor name");
        os << "tensor " << t.name << ' ' << t.value.shape().rank();
        for (int d : t.value.shape().dims()) os << ' ' << d;
        os << '\n';
    }
    os << "end\n";
    for (const auto& t : ckpt.tensors) io::write_f32_le(os, t.value.values());
}

Checkpoint read_checkpoint(std::istream& is) {
    const auto lines = io::read_header_lines(is, "end");
    if (lines.empty() || lines.front() != kMagic) throw FormatError("not a canopy checkpoint");
    Checkpoint ckpt;
    std::vector<std::pair<std::string, Shape>> layout;
    bool saw_version = false;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        std::istringstream ls(lines[i]);
        std::string key;
        ls >> key;
        if (key == "version") {
            int v = 0;
            ls >> v;
            if (v != Checkpoint::kFormatVersion) throw FormatError("unsupported checkpoint version " + std::to_string(v));
            saw_version = true;
        } else if (key == "seed") {
            ls >> ckpt.seed;
        } else if (key == "step") {
            ls >> ckpt.step;
        } else if (key == "meta") {
            std::string k;
            ls >> k;
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
            ckpt.metadata.emplace_back(k, rest);
        } else if (key == "tensor") {
            std::string name;
            std::size_t rank = 0;
            ls >> name >> rank;
            std::vector<int> dims(rank);
            for (auto& d : dims) ls >> d;
            if (!ls) throw FormatError("malformed tensor line: " + lines[i]);
            layout.emplace_back(name, Shape(dims));
        } else {
            throw FormatError("unknown checkpoint header key '" + key + "'");
        }
    }
    if (!saw_version) throw FormatError("checkpoint header lacks a version");
    for (auto& [name, shape] : layout) {
        Tensor t(shape);
        io::read_f32_le(is, t.values());
        ckpt.tensors.push_back({name, std::move(t)});
    }
    return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    std::ostringstream os;
    write_checkpoint(os, ckpt);
    io::write_file_atomic(path, os.str());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open checkpoint: " + path.string());
    return read_checkpoint(is);
}

}  // namespace canopy::numerics
