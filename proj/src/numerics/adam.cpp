#include "canopy/numerics/adam.hpp"

#include <cmath>

#include "canopy/numerics/kernels.hpp"

namespace canopy::numerics {

AdamState AdamState::for_params(std::span<const NamedTensor> params, const AdamConfig& config) {
    AdamState s;
    s.learning_rate = config.learning_rate;
    s.beta1 = config.beta1;
    s.beta2 = config.beta2;
    s.epsilon = config.epsilon;
    for (const auto& p : params) {
        s.first_moment.emplace_back(p.value.shape(), 0.0f);
        s.second_moment.emplace_back(p.value.shape(), 0.0f);
    }
    return s;
}

void adam_step(std::span<NamedTensor> params, std::span<const Tensor> grads, AdamState& state) {
    if (grads.size() != params.size()) {
        throw ShapeError("adam_step", "parameter_count", static_cast<long>(params.size()),
                         static_cast<long>(grads.size()));
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw ShapeError("adam_step", "moment_count", static_cast<long>(params.size()),
                         static_cast<long>(state.first_moment.size()));
    }
    if (!(state.learning_rate > 0.0)) throw Error("adam_step: learning rate must be positive");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Shape& ps = params[i].value.shape();
        if (grads[i].shape() != ps || state.first_moment[i].shape() != ps || state.second_moment[i].shape() != ps) {
            throw ShapeError("adam_step " + params[i].name, "numel", static_cast<long>(ps.numel()),
                             static_cast<long>(grads[i].size()));
        }
        if (!grads[i].all_finite()) {
            throw NumericError("adam_step: non-finite gradient for parameter '" + params[i].name + "'");
        }
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const kernels::AdamCoefficients coeff{
        static_cast<float>(state.learning_rate),
        static_cast<float>(state.beta1),
        static_cast<float>(state.beta2),
        static_cast<float>(state.epsilon),
        static_cast<float>(1.0 - std::pow(state.beta1, t)),
        static_cast<float>(1.0 - std::pow(state.beta2, t)),
    };
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < params.size(); ++i) {
        k.adam(params[i].value.size(), params[i].value.data(), grads[i].data(), state.first_moment[i].data(),
               state.second_moment[i].data(), coeff);
    }
}

}  // namespace canopy::numerics
