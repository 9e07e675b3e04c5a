#include "canopy/model/config.hpp"

#include <map>
#include <sstream>

#include "canopy/numerics/error.hpp"

namespace canopy::model {

ModelConfig ModelConfig::large() {
    ModelConfig c;
    c.num_blocks = 8;
    c.filters_per_block = 256;
    return c;
}

void ModelConfig::validate() const {
    if (num_blocks < 1) throw Error("model config: num_blocks must be >= 1");
    if (filters_per_block < 1) throw Error("model config: filters_per_block must be >= 1");
    if (spectral_channels < 1 || geo_channels < 0) throw Error("model config: invalid channel counts");
}

std::string ModelConfig::to_text() const {
    std::ostringstream os;
    os << "num_blocks " << num_blocks << '\n'
       << "filters_per_block " << filters_per_block << '\n'
       << "spectral_channels " << spectral_channels << '\n'
       << "geo_channels " << geo_channels << '\n';
    return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
    std::map<std::string, int*> fields;
    ModelConfig c;
    fields["num_blocks"] = &c.num_blocks;
    fields["filters_per_block"] = &c.filters_per_block;
    fields["spectral_channels"] = &c.spectral_channels;
    fields["geo_channels"] = &c.geo_channels;

    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        int value = 0;
        if (!(ls >> key >> value)) throw FormatError("model config: malformed line '" + line + "'");
        auto it = fields.find(key);
        if (it == fields.end()) throw FormatError("model config: unknown key '" + key + "'");
        *it->second = value;
    }
    c.validate();
    return c;
}

std::size_t parameter_count(const ModelConfig& config) {
    config.validate();
    const std::size_t f = static_cast<std::size_t>(config.filters_per_block);
    const std::size_t in = static_cast<std::size_t>(config.in_channels());
    const std::size_t blocks = static_cast<std::size_t>(config.num_blocks);
    return in * f * 9 + f + blocks * 2 * (f * 9 + f * f + f) + 2 * (f + 1);
}

int receptive_radius(const ModelConfig& config) {
    config.validate();
    return 1 + 2 * config.num_blocks;
}

}  // namespace canopy::model
