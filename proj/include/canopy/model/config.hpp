#pragma once

#include <cstddef>
#include <string>

namespace canopy::model {

struct ModelConfig {
    int num_blocks = 4;
    int filters_per_block = 32;
    int spectral_channels = 12;
    int geo_channels = 3;

    /// 8 blocks of 256 filters.
    static ModelConfig large();

    int in_channels() const noexcept { return spectral_channels + geo_channels; }
    /// Throws canopy::Error on a non-positive count.
    void validate() const;

    /// "key value" lines, one per field.
    std::string to_text() const;
    static ModelConfig from_text(const std::string& text);

    bool operator==(const ModelConfig&) const = default;
};

/// Number of learnable scalars, from the layer shapes:
///   stem       in*F*9 + F
///   per block  2 * (F*9 + F*F + F)
///   heads      2 * (F + 1)
std::size_t parameter_count(const ModelConfig& config);

/// Pixels of context on each side that influence one output pixel: one for
/// the stem and two per residual block.
int receptive_radius(const ModelConfig& config);

}  // namespace canopy::model
