#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "canopy/model/config.hpp"
#include "canopy/numerics/adam.hpp"
#include "canopy/numerics/checkpoint.hpp"
#include "canopy/numerics/tape.hpp"

namespace canopy::model {

/// Per-pixel prediction in whatever units the producer works in.
struct PredictionPair {
    numerics::Tensor mean;      // [B,1,H,W]
    numerics::Tensor variance;  // [B,1,H,W], strictly positive
};

/// Learnable tensors of one network, in a fixed order:
///   stem.weight, stem.bias,
///   block<i>.sep<j>.depthwise, block<i>.sep<j>.pointwise, block<i>.sep<j>.bias   (j = 1, 2)
///   head_mean.weight, head_mean.bias, head_logvar.weight, head_logvar.bias
struct NetworkParams {
    ModelConfig config;
    std::uint64_t seed = 0;
    std::vector<numerics::NamedTensor> tensors;

    std::size_t scalar_count() const;
    /// Index range [first, first+2) of the mean head.
    std::size_t mean_head_index() const { return tensors.size() - 4; }
    std::size_t logvar_head_index() const { return tensors.size() - 2; }

    const numerics::Tensor& tensor(const std::string& name) const;

    numerics::Checkpoint to_checkpoint(std::uint64_t step) const;
    static NetworkParams from_checkpoint(const numerics::Checkpoint& ckpt);

    bool operator==(const NetworkParams&) const = default;
};

/// He-normal weights (std sqrt(2/fan_in)) drawn from `seed`, except that the
/// second pointwise layer of every block and both heads start at zero, as do
/// all biases. Blocks are then identities and the heads predict N(0, 1).
NetworkParams build(const ModelConfig& config, std::uint64_t seed);

/// Variance positivity transform: exp(clamp(s, -10, 10)).
inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

template <typename T>
struct GraphOutputs {
    numerics::BasicVar<T> features;  // [B,F,H,W] trunk output
    numerics::BasicVar<T> mean;      // [B,1,H,W]
    numerics::BasicVar<T> log_variance;  // [B,1,H,W], unclamped head output
};

/// Trunk only: stem followed by the residual blocks.
template <typename T>
numerics::BasicVar<T> trunk_graph(const ModelConfig& config, std::span<const numerics::BasicVar<T>> params,
                                  const numerics::BasicVar<T>& image);

/// Applies one 1x1 head (weight, bias at params[index], params[index+1]).
template <typename T>
numerics::BasicVar<T> head_graph(std::span<const numerics::BasicVar<T>> params, std::size_t index,
                                 const numerics::BasicVar<T>& features);

/// Records the full network on the tape of `image`. `params` follows the
/// NetworkParams order.
template <typename T>
GraphOutputs<T> forward_graph(const ModelConfig& config, std::span<const numerics::BasicVar<T>> params,
                              const numerics::BasicVar<T>& image);

/// Puts every tensor of `params` on `tape`, as parameters or constants.
template <typename T>
std::vector<numerics::BasicVar<T>> bind(numerics::BasicTape<T>& tape, const NetworkParams& params,
                                        bool trainable);

/// Inference on an image [B,in_channels,H,W] with H,W >= 1.
PredictionPair forward(const NetworkParams& params, const numerics::Tensor& image);

/// Variance from a log-variance tensor, elementwise.
numerics::Tensor variance_from_log(const numerics::Tensor& log_variance);

}  // namespace canopy::model
