#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "canopy/data/footprints.hpp"
#include "canopy/model/network.hpp"
#include "canopy/training/balance.hpp"
#include "canopy/training/schedule.hpp"

namespace canopy::training {

/// Raised when the loss or a gradient stops being finite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

struct TrainLogEntry {
    std::size_t step = 0;  // 1-based update count
    double loss = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0;
};

struct TrainResult {
    model::NetworkParams params;
    std::vector<TrainLogEntry> log;
};

/// Sample indices of one batch, drawn uniformly with replacement.
std::vector<std::size_t> draw_batch(std::mt19937_64& rng, std::size_t population, int batch_size);

/// Stacks patches into [B, channels, 15, 15] and returns the flat index of
/// each center pixel within a [B, 1, 15, 15] output.
numerics::Tensor stack_patches(std::span<const data::FootprintSample> samples, std::span<const std::size_t> indices,
                               std::vector<std::size_t>* centers = nullptr);

/// Trains on normalized samples with the Gaussian NLL at patch centers.
/// Deterministic for a given (params, samples, config).
TrainResult train(model::NetworkParams params, std::span<const data::FootprintSample> samples,
                  const TrainConfig& config, const std::function<void(const TrainLogEntry&)>& on_step = {});

struct FinetuneConfig {
    std::size_t iterations = 3000;
    int batch_size = 32;
    double lr = 1e-4;
    std::uint64_t seed = 0;
};

/// Trunk output at the patch center and the frozen log-variance there, one
/// row per sample. Fine-tuning the mean head only needs these.
struct CenterFeatures {
    int filters = 0;
    std::vector<float> features;  // [N, filters]
    std::vector<float> log_variance;
};

CenterFeatures center_features(const model::NetworkParams& params, std::span<const data::FootprintSample> samples);

/// Continues training of the mean head alone, each sample's loss scaled by
/// its balance weight (rescaled to mean 1). `weights.sample_weight` must be
/// aligned with `samples`. All other tensors are returned unchanged.
model::NetworkParams finetune_mean_head(const model::NetworkParams& params,
                                        std::span<const data::FootprintSample> samples,
                                        const BalanceWeights& weights, const FinetuneConfig& config,
                                        std::vector<TrainLogEntry>* log = nullptr);

/// One JSON object per line: {"step":..,"loss":..,"lr":..,"grad_norm":..}.
void write_train_log(std::ostream& os, std::span<const TrainLogEntry> log);

}  // namespace canopy::training
