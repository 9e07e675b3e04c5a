#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace canopy::training {

/// Softened inverse-frequency weights over height bins [k, k+1) meters:
///
///   q_i = sqrt(1/N_k(i)) / sum_j sqrt(1/N_j)
///
/// where the sum runs over non-empty bins only.
struct BalanceWeights {
    double bin_width = 1.0;
    std::vector<std::size_t> counts;   // N_k per bin
    std::vector<double> bin_weight;    // q for a sample in bin k, 0 when empty
    std::vector<double> sample_weight; // q_i per input label

    std::size_t bin_of(double label) const;
    /// Per-sample weights rescaled to average 1 over the inputs.
    std::vector<double> unit_mean_weights() const;
};

/// Throws on an empty input or a negative or non-finite label.
BalanceWeights compute_balance_weights(std::span<const float> labels, double bin_width = 1.0);

}  // namespace canopy::training
