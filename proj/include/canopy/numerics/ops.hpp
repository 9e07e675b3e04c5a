#pragma once

#include <cstddef>
#include <vector>

#include "canopy/numerics/tape.hpp"

namespace canopy::numerics {

// Elementwise ops require identical shapes.
template <typename T> BasicVar<T> add(const BasicVar<T>& a, const BasicVar<T>& b);
template <typename T> BasicVar<T> sub(const BasicVar<T>& a, const BasicVar<T>& b);
template <typename T> BasicVar<T> mul(const BasicVar<T>& a, const BasicVar<T>& b);
template <typename T> BasicVar<T> scale(const BasicVar<T>& a, T factor);
template <typename T> BasicVar<T> add_scalar(const BasicVar<T>& a, T offset);
template <typename T> BasicVar<T> exp(const BasicVar<T>& a);
template <typename T> BasicVar<T> relu(const BasicVar<T>& a);
/// Gradient passes through where lo <= a <= hi and is zero outside.
template <typename T> BasicVar<T> clamp(const BasicVar<T>& a, T lo, T hi);

// Reductions to a one-element tensor.
template <typename T> BasicVar<T> sum(const BasicVar<T>& a);
template <typename T> BasicVar<T> mean(const BasicVar<T>& a);
/// sum_i weights[i] * a[i]; weights are constants.
template <typename T> BasicVar<T> weighted_sum(const BasicVar<T>& a, const BasicTensor<T>& weights);

/// Picks flat elements of `a` into a rank-1 tensor.
template <typename T> BasicVar<T> gather(const BasicVar<T>& a, const std::vector<std::size_t>& indices);

}  // namespace canopy::numerics
