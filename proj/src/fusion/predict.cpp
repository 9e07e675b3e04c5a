#include "canopy/fusion/predict.hpp"

#include <string>

#include "canopy/data/world.hpp"

namespace canopy::fusion {
namespace {

Observation run_member(const Ensemble& ensemble, int member, const InputImage& image) {
    const int h = image.channels.height(), w = image.channels.width();
    numerics::Tensor input(numerics::Shape{1, image.channels.channels(), h, w});
    std::copy(image.channels.values().begin(), image.channels.values().end(), input.data());
    data::normalize_channels(input.values(), image.channels.channels(), ensemble.stats);
    const model::PredictionPair p = model::forward(ensemble.members[static_cast<std::size_t>(member)], input);

    Observation o{data::Grid<float>(1, h, w), data::Grid<float>(1, h, w), image.valid, member, image.acquisition};
    for (std::size_t i = 0; i < o.mean.values().size(); ++i) {
        const auto [m, v] = data::denormalize_prediction(p.mean[i], p.variance[i], ensemble.stats);
        o.mean.values()[i] = static_cast<float>(m);
        o.variance.values()[i] = static_cast<float>(v);
    }
    return o;
}

}  // namespace

ObservationStack predict_tile(const Ensemble& ensemble, std::span<const InputImage> images, MemberMode mode,
                              std::span<const int> members) {
    ensemble.validate();
    if (images.empty()) throw Error("predict_tile: no images");
    ObservationStack stack;
    stack.height = images[0].channels.height();
    stack.width = images[0].channels.width();
    for (std::size_t t = 0; t < images.size(); ++t) {
        const InputImage& img = images[t];
        if (img.channels.height() != stack.height || img.channels.width() != stack.width) {
            throw ShapeError("predict_tile image " + std::to_string(t), img.channels.height() != stack.height
                                                                            ? "height"
                                                                            : "width",
                             img.channels.height() != stack.height ? stack.height : stack.width,
                             img.channels.height() != stack.height ? img.channels.height() : img.channels.width());
        }
        if (img.channels.channels() != ensemble.config().in_channels()) {
            throw ShapeError("predict_tile image " + std::to_string(t), "channels", ensemble.config().in_channels(),
                             img.channels.channels());
        }
        if (img.valid.height() != stack.height || img.valid.width() != stack.width) {
            throw ShapeError("predict_tile image " + std::to_string(t), "valid", stack.height * stack.width,
                             static_cast<long>(img.valid.values().size()));
        }
    }
    if (mode == MemberMode::assigned) {
        if (members.size() != images.size()) {
            throw ShapeError("predict_tile", "members", static_cast<long>(images.size()),
                             static_cast<long>(members.size()));
        }
        for (std::size_t t = 0; t < images.size(); ++t) {
            if (members[t] < 0 || members[t] >= ensemble.size()) {
                throw Error("predict_tile: member " + std::to_string(members[t]) + " out of range");
            }
            stack.dates.push_back(run_member(ensemble, members[t], images[t]));
        }
    } else {
        for (const auto& img : images) {
            for (int m = 0; m < ensemble.size(); ++m) stack.dates.push_back(run_member(ensemble, m, img));
        }
    }
    return stack;
}

}  // namespace canopy::fusion
