#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "canopy/numerics/tensor.hpp"

namespace canopy::numerics {

struct NamedTensor {
    std::string name;
    Tensor value;

    bool operator==(const NamedTensor&) const = default;
};

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Moment buffers mirror the parameter set they were created for.
struct AdamState {
    std::uint64_t step = 0;
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_params(std::span<const NamedTensor> params, const AdamConfig& config);
};

/// One bias-corrected ADAM update of every parameter. Validates all gradients
/// before touching any state; a non-finite gradient raises NumericError naming
/// the parameter.
void adam_step(std::span<NamedTensor> params, std::span<const Tensor> grads, AdamState& state);

}  // namespace canopy::numerics
