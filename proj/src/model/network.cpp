#include "canopy/model/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "canopy/numerics/conv.hpp"
#include "canopy/numerics/ops.hpp"

namespace canopy::model {

using numerics::BasicTape;
using numerics::BasicTensor;
using numerics::BasicVar;
using numerics::NamedTensor;
using numerics::Shape;
using numerics::Tensor;

namespace {

struct LayerShape {
    std::string name;
    Shape shape;
    int fan_in;  // 0: starts at zero
};

std::vector<LayerShape> layer_shapes(const ModelConfig& c) {
    const int f = c.filters_per_block;
    std::vector<LayerShape> out;
    out.push_back({"stem.weight", Shape{f, c.in_channels(), 3, 3}, c.in_channels() * 9});
    out.push_back({"stem.bias", Shape{f}, 0});
    for (int b = 0; b < c.num_blocks; ++b) {
        for (int j = 1; j <= 2; ++j) {
            const std::string p = "block" + std::to_string(b) + ".sep" + std::to_string(j) + ".";
            out.push_back({p + "depthwise", Shape{f, 1, 3, 3}, 9});
            // The last layer of each residual branch starts at zero so every
            // block is the identity at initialization.
            out.push_back({p + "pointwise", Shape{f, f, 1, 1}, j == 1 ? f : 0});
            out.push_back({p + "bias", Shape{f}, 0});
        }
    }
    // Heads start at zero: mean 0 and unit variance in normalized units.
    out.push_back({"head_mean.weight", Shape{1, f, 1, 1}, 0});
    out.push_back({"head_mean.bias", Shape{1}, 0});
    out.push_back({"head_logvar.weight", Shape{1, f, 1, 1}, 0});
    out.push_back({"head_logvar.bias", Shape{1}, 0});
    return out;
}

}  // namespace

std::size_t NetworkParams::scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.value.size();
    return n;
}

const Tensor& NetworkParams::tensor(const std::string& name) const {
    for (const auto& t : tensors) {
        if (t.name == name) return t.value;
    }
    throw Error("network: no tensor named '" + name + "'");
}

numerics::Checkpoint NetworkParams::to_checkpoint(std::uint64_t step) const {
    numerics::Checkpoint ckpt;
    ckpt.seed = seed;
    ckpt.step = step;
    ckpt.set_meta("num_blocks", std::to_string(config.num_blocks));
    ckpt.set_meta("filters_per_block", std::to_string(config.filters_per_block));
    ckpt.set_meta("spectral_channels", std::to_string(config.spectral_channels));
    ckpt.set_meta("geo_channels", std::to_string(config.geo_channels));
    ckpt.tensors = tensors;
    return ckpt;
}

NetworkParams NetworkParams::from_checkpoint(const numerics::Checkpoint& ckpt) {
    NetworkParams p;
    std::ostringstream cfg;
    for (const char* key : {"num_blocks", "filters_per_block", "spectral_channels", "geo_channels"}) {
        const std::string v = ckpt.meta(key);
        if (v.empty()) throw FormatError(std::string("checkpoint: missing model field '") + key + "'");
        cfg << key << ' ' << v << '\n';
    }
    p.config = ModelConfig::from_text(cfg.str());
    p.seed = ckpt.seed;
    const auto layers = layer_shapes(p.config);
    if (ckpt.tensors.size() != layers.size()) {
        throw FormatError("checkpoint: expected " + std::to_string(layers.size()) + " tensors, found " +
                          std::to_string(ckpt.tensors.size()));
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& t = ckpt.tensors[i];
        if (t.name != layers[i].name || !(t.value.shape() == layers[i].shape)) {
            throw FormatError("checkpoint: tensor " + std::to_string(i) + " is '" + t.name + "' " +
                              t.value.shape().str() + ", expected '" + layers[i].name + "' " +
                              layers[i].shape.str());
        }
    }
    p.tensors = ckpt.tensors;
    return p;
}

NetworkParams build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    NetworkParams p;
    p.config = config;
    p.seed = seed;
    std::mt19937_64 rng(seed);
    for (const auto& layer : layer_shapes(config)) {
        Tensor t(layer.shape, 0.0f);
        if (layer.fan_in > 0) {
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / layer.fan_in));
            for (float& v : t.values()) v = static_cast<float>(dist(rng));
        }
        p.tensors.push_back({layer.name, std::move(t)});
    }
    return p;
}

template <typename T>
BasicVar<T> trunk_graph(const ModelConfig& config, std::span<const BasicVar<T>> params, const BasicVar<T>& image) {
    using numerics::relu;
    const std::size_t expected = layer_shapes(config).size();
    if (params.size() != expected) {
        throw ShapeError("network", "parameters", static_cast<long>(expected), static_cast<long>(params.size()));
    }
    numerics::require_rank4(image.value(), "network");
    if (image.shape()[1] != config.in_channels()) {
        throw ShapeError("network", "channels", config.in_channels(), image.shape()[1]);
    }
    auto x = relu(numerics::conv3x3(image, params[0], params[1]));
    std::size_t k = 2;
    for (int b = 0; b < config.num_blocks; ++b, k += 6) {
        auto h = numerics::pointwise_conv(numerics::depthwise_conv3x3(x, params[k]), params[k + 1], params[k + 2]);
        h = relu(h);
        h = numerics::pointwise_conv(numerics::depthwise_conv3x3(h, params[k + 3]), params[k + 4], params[k + 5]);
        x = relu(numerics::add(h, x));
    }
    return x;
}

template <typename T>
BasicVar<T> head_graph(std::span<const BasicVar<T>> params, std::size_t index, const BasicVar<T>& features) {
    return numerics::pointwise_conv(features, params[index], params[index + 1]);
}

template <typename T>
GraphOutputs<T> forward_graph(const ModelConfig& config, std::span<const BasicVar<T>> params,
                              const BasicVar<T>& image) {
    GraphOutputs<T> out;
    out.features = trunk_graph(config, params, image);
    out.mean = head_graph(params, params.size() - 4, out.features);
    out.log_variance = head_graph(params, params.size() - 2, out.features);
    return out;
}

template <typename T>
std::vector<BasicVar<T>> bind(BasicTape<T>& tape, const NetworkParams& params, bool trainable) {
    std::vector<BasicVar<T>> vars;
    vars.reserve(params.tensors.size());
    for (const auto& t : params.tensors) {
        BasicTensor<T> v = t.value.template cast<T>();
        vars.push_back(trainable ? tape.parameter(std::move(v)) : tape.constant(std::move(v)));
    }
    return vars;
}

Tensor variance_from_log(const Tensor& log_variance) {
    Tensor out = log_variance;
    for (float& v : out.values()) {
        const double s = std::min(std::max(static_cast<double>(v), kLogVarMin), kLogVarMax);
        v = static_cast<float>(std::exp(s));
    }
    return out;
}

PredictionPair forward(const NetworkParams& params, const Tensor& image) {
    numerics::Tape tape;
    const auto vars = bind<float>(tape, params, false);
    const auto out = forward_graph<float>(params.config, vars, tape.constant(image));
    return {out.mean.value(), variance_from_log(out.log_variance.value())};
}

#define CANOPY_INSTANTIATE(T)                                                                                  \
    template BasicVar<T> trunk_graph<T>(const ModelConfig&, std::span<const BasicVar<T>>, const BasicVar<T>&); \
    template BasicVar<T> head_graph<T>(std::span<const BasicVar<T>>, std::size_t, const BasicVar<T>&);         \
    template GraphOutputs<T> forward_graph<T>(const ModelConfig&, std::span<const BasicVar<T>>,                \
                                              const BasicVar<T>&);                                             \
    template std::vector<BasicVar<T>> bind<T>(BasicTape<T>&, const NetworkParams&, bool);

CANOPY_INSTANTIATE(float)
CANOPY_INSTANTIATE(double)
#undef CANOPY_INSTANTIATE

}  // namespace canopy::model
