#include "canopy/training/schedule.hpp"

#include <cmath>

#include "canopy/numerics/error.hpp"

namespace canopy::training {

void TrainConfig::validate() const {
    if (iterations < 1) throw Error("train config: iterations must be >= 1");
    if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
    if (!(base_lr > 0.0)) throw Error("train config: base_lr must be positive");
    if (!(drop_factor > 0.0 && drop_factor <= 1.0)) throw Error("train config: drop_factor must lie in (0, 1]");
    double prev = 0.0;
    for (double d : drop_at) {
        if (!(d >= prev && d <= 1.0)) throw Error("train config: drop points must be ascending within [0, 1]");
        prev = d;
    }
}

std::vector<std::size_t> drop_steps(const TrainConfig& config) {
    std::vector<std::size_t> out;
    for (double d : config.drop_at) {
        out.push_back(static_cast<std::size_t>(std::llround(d * static_cast<double>(config.iterations))));
    }
    return out;
}

double learning_rate_at(const TrainConfig& config, std::size_t step) {
    double lr = config.base_lr;
    for (std::size_t s : drop_steps(config)) {
        if (step >= s) lr *= config.drop_factor;
    }
    return lr;
}

}  // namespace canopy::training
