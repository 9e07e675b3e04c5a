#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "canopy/numerics/adam.hpp"

namespace canopy::training {

struct TrainConfig {
    std::size_t iterations = 20000;
    int batch_size = 32;
    double base_lr = 1e-4;
    /// The rate is multiplied by `drop_factor` once `drop_at[i] * iterations`
    /// steps have completed, for each i.
    std::vector<double> drop_at = {0.4, 0.7};
    double drop_factor = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    /// Throws on a non-positive rate, batch or iteration count, or on drop
    /// points outside [0, 1] or out of order.
    void validate() const;
    numerics::AdamConfig adam() const { return {base_lr, beta1, beta2, epsilon}; }
};

/// Learning rate used for the update at 0-based `step`.
double learning_rate_at(const TrainConfig& config, std::size_t step);

/// First step index at which each drop applies.
std::vector<std::size_t> drop_steps(const TrainConfig& config);

}  // namespace canopy::training
