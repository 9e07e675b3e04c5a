#pragma once

#include <cstddef>
#include <vector>

#include "canopy/numerics/tape.hpp"

namespace canopy::training {

/// Gaussian negative log-likelihood over the labeled pixels only:
///
///   (1/N) sum_i w_i * [ (mu_i - y_i)^2 / (2 sigma_i^2) + log(sigma_i^2) / 2 ]
///
/// with log sigma^2 = clamp(log_var, -10, 10). `mask` holds flat indices into
/// `mean` / `log_var` (identical shapes) and `labels[i]` belongs to mask[i].
/// Without `weights` every w_i is 1. Unmasked pixels get zero gradient.
template <typename T>
numerics::BasicVar<T> gaussian_nll(const numerics::BasicVar<T>& mean, const numerics::BasicVar<T>& log_var,
                                   const std::vector<T>& labels, const std::vector<std::size_t>& mask,
                                   const std::vector<T>* weights = nullptr);

}  // namespace canopy::training
