#include "canopy/training/nll.hpp"

#include "canopy/model/network.hpp"
#include "canopy/numerics/ops.hpp"

namespace canopy::training {

using namespace numerics;

template <typename T>
BasicVar<T> gaussian_nll(const BasicVar<T>& mean, const BasicVar<T>& log_var, const std::vector<T>& labels,
                         const std::vector<std::size_t>& mask, const std::vector<T>* weights) {
    if (mask.empty()) throw Error("gaussian_nll: empty label mask");
    if (labels.size() != mask.size()) {
        throw ShapeError("gaussian_nll", "labels", static_cast<long>(mask.size()), static_cast<long>(labels.size()));
    }
    if (!(mean.shape() == log_var.shape())) {
        throw ShapeError("gaussian_nll", "numel", static_cast<long>(mean.value().size()),
                         static_cast<long>(log_var.value().size()));
    }
    const int n = static_cast<int>(mask.size());
    BasicTape<T>& tape = mean.tape();
    const auto mu = gather(mean, mask);
    const auto s = clamp(gather(log_var, mask), T(model::kLogVarMin), T(model::kLogVarMax));
    const auto y = tape.constant(BasicTensor<T>(Shape{n}, labels));
    const auto d = sub(mu, y);
    const auto term = add(scale(mul(mul(d, d), exp(scale(s, T(-1)))), T(0.5)), scale(s, T(0.5)));
    if (!weights) return numerics::mean(term);
    if (weights->size() != mask.size()) {
        throw ShapeError("gaussian_nll", "weights", static_cast<long>(mask.size()),
                         static_cast<long>(weights->size()));
    }
    return scale(weighted_sum(term, BasicTensor<T>(Shape{n}, *weights)), T(1) / T(n));
}

template BasicVar<float> gaussian_nll(const BasicVar<float>&, const BasicVar<float>&, const std::vector<float>&,
                                      const std::vector<std::size_t>&, const std::vector<float>*);
template BasicVar<double> gaussian_nll(const BasicVar<double>&, const BasicVar<double>&,
                                       const std::vector<double>&, const std::vector<std::size_t>&,
                                       const std::vector<double>*);

}  // namespace canopy::training
