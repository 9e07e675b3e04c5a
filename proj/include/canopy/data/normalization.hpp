#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "canopy/data/footprints.hpp"

namespace canopy::data {

/// Population (divide-by-N) statistics over every pixel of every training
/// patch, plus the label distribution.
struct NormStats {
    std::vector<double> channel_mean;
    std::vector<double> channel_std;
    double label_mean = 0.0;
    double label_std = 1.0;

    bool operator==(const NormStats&) const = default;
};

/// Needs at least two samples; throws on a channel or label with zero spread.
NormStats compute_norm_stats(std::span<const FootprintSample> train);

FootprintSample normalize(const FootprintSample& sample, const NormStats& stats);

/// In-place channel normalization of a channels-first buffer.
void normalize_channels(std::span<float> values, int channels, const NormStats& stats);

/// "<label_mean> <label_std> <mean_0> <std_0> ..." at full precision.
std::string norm_stats_to_text(const NormStats& stats);
NormStats norm_stats_from_text(const std::string& text);

/// (mean * std + mean_label, var * std^2): meters and square meters.
std::pair<double, double> denormalize_prediction(double mean, double variance, const NormStats& stats);

}  // namespace canopy::data
