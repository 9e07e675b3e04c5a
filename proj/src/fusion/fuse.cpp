#include "canopy/fusion/fuse.hpp"

#include <cmath>
#include <string>

#include "canopy/numerics/kernels.hpp"

namespace canopy::fusion {

FusedPrediction fuse(const ObservationStack& stack, double variance_floor) {
    if (stack.height < 1 || stack.width < 1) throw Error("fuse: empty extent");
    const std::size_t pixels = static_cast<std::size_t>(stack.height) * stack.width;
    std::vector<const float*> means, variances;
    std::vector<const std::uint8_t*> valids;
    for (std::size_t t = 0; t < stack.dates.size(); ++t) {
        const Observation& o = stack.dates[t];
        for (const auto* g : {&o.mean, &o.variance}) {
            if (g->height() != stack.height || g->width() != stack.width || g->channels() != 1) {
                throw ShapeError("fuse date " + std::to_string(t), "extent", static_cast<long>(pixels),
                                 static_cast<long>(g->values().size()));
            }
        }
        if (o.valid.height() != stack.height || o.valid.width() != stack.width) {
            throw ShapeError("fuse date " + std::to_string(t), "valid", static_cast<long>(pixels),
                             static_cast<long>(o.valid.values().size()));
        }
        for (std::size_t i = 0; i < pixels; ++i) {
            if (!o.valid.values()[i]) continue;
            const float v = o.variance.values()[i];
            if (!(v > 0.0f) || !std::isfinite(v) || !std::isfinite(o.mean.values()[i])) {
                throw NumericError("fuse: date " + std::to_string(t) + " pixel " + std::to_string(i) +
                                   " has invalid mean/variance");
            }
        }
        means.push_back(o.mean.values().data());
        variances.push_back(o.variance.values().data());
        valids.push_back(o.valid.values().data());
    }

    FusedPrediction out{data::Grid<double>(1, stack.height, stack.width, 0.0),
                        data::Grid<double>(1, stack.height, stack.width, 0.0),
                        data::Grid<std::uint8_t>(1, stack.height, stack.width, 0)};
    if (stack.dates.empty()) return out;
    numerics::kernels::FuseArgs args;
    args.dates = static_cast<int>(stack.dates.size());
    args.pixels = pixels;
    args.mean = means.data();
    args.variance = variances.data();
    args.valid = valids.data();
    args.variance_floor = variance_floor;
    args.out_mean = out.mean.values().data();
    args.out_variance = out.variance.values().data();
    args.out_valid = out.valid.values().data();
    numerics::kernels::active().fuse(args);
    return out;
}

}  // namespace canopy::fusion
