#include "canopy/training/balance.hpp"

#include <cmath>

#include "canopy/numerics/error.hpp"

namespace canopy::training {

std::size_t BalanceWeights::bin_of(double label) const {
    return static_cast<std::size_t>(std::floor(label / bin_width));
}

std::vector<double> BalanceWeights::unit_mean_weights() const {
    double total = 0.0;
    for (double q : sample_weight) total += q;
    std::vector<double> out(sample_weight.size());
    const double scale = static_cast<double>(sample_weight.size()) / total;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_weight[i] * scale;
    return out;
}

BalanceWeights compute_balance_weights(std::span<const float> labels, double bin_width) {
    if (labels.empty()) throw Error("balance weights: no labels");
    if (!(bin_width > 0.0)) throw Error("balance weights: bin width must be positive");
    BalanceWeights w;
    w.bin_width = bin_width;
    for (float y : labels) {
        if (!std::isfinite(y) || y < 0.0f) throw Error("balance weights: labels must be finite and >= 0");
        const std::size_t k = w.bin_of(y);
        if (k >= w.counts.size()) w.counts.resize(k + 1, 0);
        ++w.counts[k];
    }
    double denom = 0.0;
    for (std::size_t n : w.counts) {
        if (n > 0) denom += std::sqrt(1.0 / static_cast<double>(n));
    }
    w.bin_weight.assign(w.counts.size(), 0.0);
    for (std::size_t k = 0; k < w.counts.size(); ++k) {
        if (w.counts[k] > 0) w.bin_weight[k] = std::sqrt(1.0 / static_cast<double>(w.counts[k])) / denom;
    }
    w.sample_weight.reserve(labels.size());
    for (float y : labels) w.sample_weight.push_back(w.bin_weight[w.bin_of(y)]);
    return w;
}

}  // namespace canopy::training
