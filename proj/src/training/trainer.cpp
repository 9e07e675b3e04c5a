#include "canopy/training/trainer.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "canopy/numerics/conv.hpp"
#include "canopy/numerics/ops.hpp"
#include "canopy/training/nll.hpp"
#include "json.hpp"

namespace canopy::training {

using numerics::NamedTensor;
using numerics::Shape;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

namespace {

constexpr std::size_t kPlane = data::kPatchSize * data::kPatchSize;
constexpr std::size_t kCenter = (data::kPatchSize / 2) * data::kPatchSize + data::kPatchSize / 2;

double global_norm(std::span<const Tensor> grads) {
    double ss = 0.0;
    for (const auto& g : grads) {
        for (float v : g.values()) ss += static_cast<double>(v) * v;
    }
    return std::sqrt(ss);
}

}  // namespace

std::vector<std::size_t> draw_batch(std::mt19937_64& rng, std::size_t population, int batch_size) {
    if (population == 0) throw Error("batch: empty sample set");
    std::uniform_int_distribution<std::size_t> pick(0, population - 1);
    std::vector<std::size_t> out(static_cast<std::size_t>(batch_size));
    for (auto& i : out) i = pick(rng);
    return out;
}

Tensor stack_patches(std::span<const data::FootprintSample> samples, std::span<const std::size_t> indices,
                     std::vector<std::size_t>* centers) {
    const int b = static_cast<int>(indices.size());
    Tensor out(Shape{b, data::kInputChannels, data::kPatchSize, data::kPatchSize});
    if (centers) centers->clear();
    for (int i = 0; i < b; ++i) {
        const auto& patch = samples[indices[static_cast<std::size_t>(i)]].patch;
        std::copy(patch.begin(), patch.end(), out.data() + static_cast<std::size_t>(i) * data::kPatchValues);
        if (centers) centers->push_back(static_cast<std::size_t>(i) * kPlane + kCenter);
    }
    return out;
}

TrainResult train(model::NetworkParams params, std::span<const data::FootprintSample> samples,
                  const TrainConfig& config, const std::function<void(const TrainLogEntry&)>& on_step) {
    config.validate();
    if (samples.empty()) throw Error("train: no samples");
    numerics::AdamState state = numerics::AdamState::for_params(params.tensors, config.adam());
    std::mt19937_64 rng(config.seed);
    TrainResult result;
    result.log.reserve(config.iterations);
    std::vector<std::size_t> centers;
    std::vector<float> labels(static_cast<std::size_t>(config.batch_size));
    std::vector<Tensor> grads(params.tensors.size());

    for (std::size_t step = 0; step < config.iterations; ++step) {
        const auto idx = draw_batch(rng, samples.size(), config.batch_size);
        for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = samples[idx[i]].label;
        TrainLogEntry entry;
        entry.step = step + 1;
        entry.lr = learning_rate_at(config, step);
        try {
            Tape tape;
            const auto vars = model::bind<float>(tape, params, true);
            const auto image = tape.constant(stack_patches(samples, idx, &centers));
            const auto out = model::forward_graph<float>(params.config, vars, image);
            const auto loss = gaussian_nll<float>(out.mean, out.log_variance, labels, centers);
            tape.backward(loss);
            entry.loss = loss.value().item();
            for (std::size_t k = 0; k < vars.size(); ++k) grads[k] = vars[k].grad();
        } catch (const NumericError& e) {
            throw DivergenceError("train: non-finite value at step " + std::to_string(step + 1) + ": " + e.what());
        }
        if (!std::isfinite(entry.loss)) {
            throw DivergenceError("train: loss is not finite at step " + std::to_string(step + 1));
        }
        entry.grad_norm = global_norm(grads);
        state.learning_rate = entry.lr;
        try {
            numerics::adam_step(params.tensors, grads, state);
        } catch (const NumericError& e) {
            throw DivergenceError("train: step " + std::to_string(step + 1) + ": " + e.what());
        }
        result.log.push_back(entry);
        if (on_step) on_step(entry);
    }
    result.params = std::move(params);
    return result;
}

CenterFeatures center_features(const model::NetworkParams& params, std::span<const data::FootprintSample> samples) {
    CenterFeatures cf;
    cf.filters = params.config.filters_per_block;
    const std::size_t f = static_cast<std::size_t>(cf.filters);
    cf.features.resize(samples.size() * f);
    cf.log_variance.resize(samples.size());
    constexpr std::size_t chunk = 64;
    for (std::size_t start = 0; start < samples.size(); start += chunk) {
        const std::size_t n = std::min(chunk, samples.size() - start);
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = start + i;
        Tape tape;
        const auto vars = model::bind<float>(tape, params, false);
        const auto out = model::forward_graph<float>(params.config, vars, tape.constant(stack_patches(samples, idx)));
        const Tensor& feat = out.features.value();
        const Tensor& lv = out.log_variance.value();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < f; ++c) cf.features[(start + i) * f + c] = feat[(i * f + c) * kPlane + kCenter];
            cf.log_variance[start + i] = lv[i * kPlane + kCenter];
        }
    }
    return cf;
}

model::NetworkParams finetune_mean_head(const model::NetworkParams& params,
                                        std::span<const data::FootprintSample> samples,
                                        const BalanceWeights& weights, const FinetuneConfig& config,
                                        std::vector<TrainLogEntry>* log) {
    if (samples.empty()) throw Error("finetune: no samples");
    if (weights.sample_weight.size() != samples.size()) {
        throw ShapeError("finetune", "weights", static_cast<long>(samples.size()),
                         static_cast<long>(weights.sample_weight.size()));
    }
    if (config.batch_size < 1 || !(config.lr > 0.0)) throw Error("finetune: invalid configuration");

    const CenterFeatures cf = center_features(params, samples);
    const std::vector<double> unit = weights.unit_mean_weights();
    const std::size_t head = params.mean_head_index();
    const std::size_t f = static_cast<std::size_t>(cf.filters);
    const int b = config.batch_size;

    std::vector<NamedTensor> head_params = {params.tensors[head], params.tensors[head + 1]};
    numerics::AdamState state =
        numerics::AdamState::for_params(head_params, numerics::AdamConfig{config.lr, 0.9, 0.999, 1e-8});
    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> mask(static_cast<std::size_t>(b));
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = i;
    std::vector<float> labels(mask.size()), q(mask.size());

    for (std::size_t step = 0; step < config.iterations; ++step) {
        const auto idx = draw_batch(rng, samples.size(), b);
        Tensor feat(Shape{b, cf.filters, 1, 1});
        Tensor lv(Shape{b, 1, 1, 1});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(cf.features.data() + idx[i] * f, f, feat.data() + i * f);
            lv[i] = cf.log_variance[idx[i]];
            labels[i] = samples[idx[i]].label;
            q[i] = static_cast<float>(unit[idx[i]]);
        }
        Tape tape;
        const std::vector<Var> vars = {tape.parameter(head_params[0].value), tape.parameter(head_params[1].value)};
        const auto mu = model::head_graph<float>(vars, 0, tape.constant(std::move(feat)));
        const auto loss = gaussian_nll<float>(mu, tape.constant(std::move(lv)), labels, mask, &q);
        tape.backward(loss);
        const std::vector<Tensor> grads = {vars[0].grad(), vars[1].grad()};
        const double lr = config.lr;
        state.learning_rate = lr;
        numerics::adam_step(head_params, grads, state);
        if (log) log->push_back({step + 1, loss.value().item(), lr, global_norm(grads)});
    }

    model::NetworkParams out = params;
    out.tensors[head] = head_params[0];
    out.tensors[head + 1] = head_params[1];
    return out;
}

void write_train_log(std::ostream& os, std::span<const TrainLogEntry> log) {
    for (const auto& e : log) {
        nlohmann::ordered_json j;
        j["step"] = e.step;
        j["loss"] = e.loss;
        j["lr"] = e.lr;
        j["grad_norm"] = e.grad_norm;
        os << j.dump() << '\n';
    }
}

}  // namespace canopy::training
