#pragma once

#include "canopy/numerics/tape.hpp"

namespace canopy::numerics {

/// 3x3 convolution with padding 1, stride 1: output spatial size equals the
/// input's. Separable means depthwise 3x3 followed by pointwise 1x1.
struct ConvSpec {
    static constexpr int kernel = 3;
    static constexpr int padding = 1;

    int in_channels = 0;
    int out_channels = 0;
    bool separable = false;

    Shape depthwise_shape() const { return Shape{in_channels, 1, kernel, kernel}; }
    Shape weight_shape() const {
        return separable ? Shape{out_channels, in_channels, 1, 1}
                         : Shape{out_channels, in_channels, kernel, kernel};
    }
    Shape bias_shape() const { return Shape{out_channels}; }
};

/// Learnable tensors of one convolution. `depthwise` is used only when the
/// spec is separable; `bias` may be left invalid for no bias.
template <typename T>
struct ConvParams {
    BasicVar<T> depthwise;
    BasicVar<T> weight;
    BasicVar<T> bias;
};

/// Dense 3x3: x [B,Cin,H,W], weight [Cout,Cin,3,3], optional bias [Cout].
template <typename T>
BasicVar<T> conv3x3(const BasicVar<T>& x, const BasicVar<T>& weight, const BasicVar<T>& bias);

/// Per-channel 3x3: x [B,C,H,W], weight [C,1,3,3].
template <typename T>
BasicVar<T> depthwise_conv3x3(const BasicVar<T>& x, const BasicVar<T>& weight);

/// 1x1: x [B,Cin,H,W], weight [Cout,Cin,1,1], optional bias [Cout].
template <typename T>
BasicVar<T> pointwise_conv(const BasicVar<T>& x, const BasicVar<T>& weight, const BasicVar<T>& bias);

template <typename T>
BasicVar<T> conv2d_forward(const BasicVar<T>& x, const ConvSpec& spec, const ConvParams<T>& params);

}  // namespace canopy::numerics
