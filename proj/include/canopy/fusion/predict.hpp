#pragma once

#include <span>
#include <vector>

#include "canopy/data/grid.hpp"
#include "canopy/fusion/ensemble.hpp"
#include "canopy/fusion/fuse.hpp"

namespace canopy::fusion {

/// Raw (unnormalized) input channels of one acquisition date.
struct InputImage {
    data::Grid<float> channels;     // data::kInputChannels
    data::Grid<std::uint8_t> valid; // 1 = observed
    int acquisition = 0;
};

enum class MemberMode {
    /// Each date is processed by the one member given for it.
    assigned,
    /// Each date is processed by every member, giving M observations per date.
    all_members,
};

/// Normalizes each image, runs the selected member(s) and denormalizes mean
/// and variance to meters. In `assigned` mode `members[t]` names the member
/// for date t. Throws on extent or channel mismatches.
ObservationStack predict_tile(const Ensemble& ensemble, std::span<const InputImage> images, MemberMode mode,
                              std::span<const int> members = {});

}  // namespace canopy::fusion
