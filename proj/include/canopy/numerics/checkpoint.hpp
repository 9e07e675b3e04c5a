#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "canopy/numerics/adam.hpp"

namespace canopy::numerics {

/// Parameter container: a text header (format version, seed, step count,
/// free-form metadata, one line per tensor with its shape) followed by the
/// tensors' little-endian float32 payloads in header order.
///
///   canopy-checkpoint
///   version 1
///   seed 7
///   step 20000
///   meta <key> <value>
///   tensor <name> <rank> <d0> ... <dn>
///   end
struct Checkpoint {
    static constexpr int kFormatVersion = 1;

    std::uint64_t seed = 0;
    std::uint64_t step = 0;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<NamedTensor> tensors;

    /// Empty string when `key` is absent.
    std::string meta(const std::string& key) const;
    void set_meta(const std::string& key, const std::string& value);

    bool operator==(const Checkpoint&) const = default;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace canopy::numerics
