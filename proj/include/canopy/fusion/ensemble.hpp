#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "canopy/data/normalization.hpp"
#include "canopy/model/network.hpp"

namespace canopy::fusion {

/// Independently initialized and trained networks of one architecture,
/// sharing the normalization of their training data.
struct Ensemble {
    std::vector<model::NetworkParams> members;
    data::NormStats stats;
    std::uint64_t assignment_seed = 0;

    const model::ModelConfig& config() const;
    int size() const { return static_cast<int>(members.size()); }
    /// Throws when empty or when members disagree on the architecture.
    void validate() const;
};

/// Writes `ensemble.txt` plus one checkpoint per member into `dir`:
///
///   canopy-ensemble
///   version 1
///   assignment_seed <seed>
///   norm <label_mean> <label_std> <mean_0> <std_0> ...
///   member <file>
///   ...
///   end
void save_ensemble(const std::filesystem::path& dir, const Ensemble& ensemble);
Ensemble load_ensemble(const std::filesystem::path& dir);

/// One member id per date, independent uniform draws from `seed`.
std::vector<int> assign_members(int dates, int members, std::uint64_t seed);

}  // namespace canopy::fusion
