#include "canopy/data/normalization.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace canopy::data {

NormStats compute_norm_stats(std::span<const FootprintSample> train) {
    if (train.size() < 2) throw Error("norm stats: need at least 2 training samples");
    constexpr std::size_t plane = kPatchSize * kPatchSize;
    NormStats st;
    st.channel_mean.assign(kInputChannels, 0.0);
    st.channel_std.assign(kInputChannels, 0.0);
    const double n = static_cast<double>(train.size() * plane);
    for (const auto& s : train) {
        for (int c = 0; c < kInputChannels; ++c) {
            for (std::size_t i = 0; i < plane; ++i) st.channel_mean[c] += s.patch[c * plane + i];
        }
        st.label_mean += s.label;
    }
    for (double& m : st.channel_mean) m /= n;
    st.label_mean /= static_cast<double>(train.size());

    double label_ss = 0.0;
    for (const auto& s : train) {
        for (int c = 0; c < kInputChannels; ++c) {
            for (std::size_t i = 0; i < plane; ++i) {
                const double d = s.patch[c * plane + i] - st.channel_mean[c];
                st.channel_std[c] += d * d;
            }
        }
        label_ss += (s.label - st.label_mean) * (s.label - st.label_mean);
    }
    for (int c = 0; c < kInputChannels; ++c) {
        st.channel_std[c] = std::sqrt(st.channel_std[c] / n);
        if (!(st.channel_std[c] > 0.0)) {
            throw Error("norm stats: channel " + channel_names()[c] + " has zero variance");
        }
    }
    st.label_std = std::sqrt(label_ss / static_cast<double>(train.size()));
    if (!(st.label_std > 0.0)) throw Error("norm stats: labels have zero variance");
    return st;
}

void normalize_channels(std::span<float> values, int channels, const NormStats& stats) {
    if (channels != static_cast<int>(stats.channel_mean.size()) || values.size() % channels != 0) {
        throw ShapeError("normalize", "channels", static_cast<long>(stats.channel_mean.size()), channels);
    }
    const std::size_t plane = values.size() / channels;
    for (int c = 0; c < channels; ++c) {
        const double m = stats.channel_mean[c], inv = 1.0 / stats.channel_std[c];
        for (std::size_t i = 0; i < plane; ++i) {
            float& v = values[c * plane + i];
            v = static_cast<float>((v - m) * inv);
        }
    }
}

FootprintSample normalize(const FootprintSample& sample, const NormStats& stats) {
    FootprintSample out = sample;
    normalize_channels(out.patch, kInputChannels, stats);
    out.label = static_cast<float>((sample.label - stats.label_mean) / stats.label_std);
    return out;
}

std::string norm_stats_to_text(const NormStats& stats) {
    std::ostringstream os;
    os.precision(std::numeric_limits<double>::max_digits10);
    os << stats.label_mean << ' ' << stats.label_std;
    for (std::size_t c = 0; c < stats.channel_mean.size(); ++c) {
        os << ' ' << stats.channel_mean[c] << ' ' << stats.channel_std[c];
    }
    return os.str();
}

NormStats norm_stats_from_text(const std::string& text) {
    std::istringstream is(text);
    NormStats st;
    if (!(is >> st.label_mean >> st.label_std)) throw FormatError("norm stats: malformed '" + text + "'");
    double m = 0.0, s = 0.0;
    while (is >> m >> s) {
        st.channel_mean.push_back(m);
        st.channel_std.push_back(s);
    }
    if (!is.eof()) throw FormatError("norm stats: malformed '" + text + "'");
    if (st.channel_mean.size() != static_cast<std::size_t>(kInputChannels)) {
        throw FormatError("norm stats: expected " + std::to_string(kInputChannels) + " channels");
    }
    return st;
}

std::pair<double, double> denormalize_prediction(double mean, double variance, const NormStats& stats) {
    return {mean * stats.label_std + stats.label_mean, variance * stats.label_std * stats.label_std};
}

}  // namespace canopy::data
