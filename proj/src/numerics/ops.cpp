#include "canopy/numerics/ops.hpp"

#include <cmath>

#include "backend.hpp"

namespace canopy::numerics {
namespace {

template <typename T>
void require_same_shape(const BasicVar<T>& a, const BasicVar<T>& b, const char* op) {
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.rank() != sb.rank()) {
        throw ShapeError(op, "rank", static_cast<long>(sa.rank()), static_cast<long>(sb.rank()));
    }
    for (std::size_t i = 0; i < sa.rank(); ++i) {
        if (sa[i] != sb[i]) throw ShapeError(op, axis_name(sa.rank(), i), sa[i], sb[i]);
    }
}

template <typename T>
void accumulate(BasicTape<T>& tape, const BasicVar<T>& target, const BasicTensor<T>& delta, T factor = T(1)) {
    if (!target.requires_grad()) return;
    BasicTensor<T>& g = tape.grad_accumulator(target.id());
    detail::Backend<T>::axpy(g.size(), factor, delta.data(), g.data());
}

}  // namespace

template <typename T>
BasicVar<T> add(const BasicVar<T>& a, const BasicVar<T>& b) {
    require_same_shape(a, b, "add");
    BasicTensor<T> out = a.value();
    detail::Backend<T>::axpy(out.size(), T(1), b.value().data(), out.data());
    return a.tape().record("add", std::move(out), {a, b}, [a, b](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        accumulate(tape, a, g);
        accumulate(tape, b, g);
    });
}

template <typename T>
BasicVar<T> sub(const BasicVar<T>& a, const BasicVar<T>& b) {
    require_same_shape(a, b, "sub");
    BasicTensor<T> out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
    return a.tape().record("sub", std::move(out), {a, b}, [a, b](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        accumulate(tape, a, g);
        accumulate(tape, b, g, T(-1));
    });
}

template <typename T>
BasicVar<T> mul(const BasicVar<T>& a, const BasicVar<T>& b) {
    require_same_shape(a, b, "mul");
    BasicTensor<T> out = a.value();
    const auto bv = b.value().values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
    return a.tape().record("mul", std::move(out), {a, b}, [a, b](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        const auto av = a.value().values();
        const auto bv = b.value().values();
        if (a.requires_grad()) {
            auto& ga = tape.grad_accumulator(a.id());
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (b.requires_grad()) {
            auto& gb = tape.grad_accumulator(b.id());
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

template <typename T>
BasicVar<T> scale(const BasicVar<T>& a, T factor) {
    BasicTensor<T> out = a.value();
    for (T& v : out.values()) v *= factor;
    return a.tape().record("scale", std::move(out), {a}, [a, factor](BasicTape<T>& tape, std::size_t self) {
        accumulate(tape, a, tape.grad(self), factor);
    });
}

template <typename T>
BasicVar<T> add_scalar(const BasicVar<T>& a, T offset) {
    BasicTensor<T> out = a.value();
    for (T& v : out.values()) v += offset;
    return a.tape().record("add_scalar", std::move(out), {a}, [a](BasicTape<T>& tape, std::size_t self) {
        accumulate(tape, a, tape.grad(self));
    });
}

template <typename T>
BasicVar<T> exp(const BasicVar<T>& a) {
    BasicTensor<T> out = a.value();
    for (T& v : out.values()) v = std::exp(v);
    return a.tape().record("exp", std::move(out), {a}, [a](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        const BasicTensor<T>& y = tape.value(self);
        auto& ga = tape.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    });
}

template <typename T>
BasicVar<T> relu(const BasicVar<T>& a) {
    const BasicTensor<T>& x = a.value();
    BasicTensor<T> out(x.shape());
    detail::Backend<T>::relu(x.size(), x.data(), out.data());
    BasicTape<T>& tape = a.tape();
    if (tape.tracking_kinks()) {
        std::vector<std::uint8_t> branch(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) branch[i] = x[i] > T(0);
        tape.note_kinks(branch);
    }
    return tape.record("relu", std::move(out), {a}, [a](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        const BasicTensor<T>& x = a.value();
        auto& ga = tape.grad_accumulator(a.id());
        detail::Backend<T>::relu_backward(g.size(), x.data(), g.data(), ga.data());
    });
}

template <typename T>
BasicVar<T> clamp(const BasicVar<T>& a, T lo, T hi) {
    if (!(lo <= hi)) throw Error("clamp: lower bound exceeds upper bound");
    const BasicTensor<T>& x = a.value();
    BasicTensor<T> out = x;
    for (T& v : out.values()) v = v < lo ? lo : (v > hi ? hi : v);
    BasicTape<T>& tape = a.tape();
    if (tape.tracking_kinks()) {
        std::vector<std::uint8_t> branch(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) branch[i] = x[i] < lo ? 0 : (x[i] > hi ? 2 : 1);
        tape.note_kinks(branch);
    }
    return tape.record("clamp", std::move(out), {a}, [a, lo, hi](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        const BasicTensor<T>& x = a.value();
        auto& ga = tape.grad_accumulator(a.id());
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[i] >= lo && x[i] <= hi) ga[i] += g[i];
        }
    });
}

template <typename T>
BasicVar<T> sum(const BasicVar<T>& a) {
    T acc = 0;
    for (T v : a.value().values()) acc += v;
    return a.tape().record("sum", BasicTensor<T>::scalar(acc), {a}, [a](BasicTape<T>& tape, std::size_t self) {
        const T g = tape.grad(self)[0];
        auto& ga = tape.grad_accumulator(a.id());
        for (T& v : ga.values()) v += g;
    });
}

template <typename T>
BasicVar<T> mean(const BasicVar<T>& a) {
    const std::size_t n = a.value().size();
    if (n == 0) throw ShapeError("mean", "numel", 1, 0);
    return scale(sum(a), T(1) / static_cast<T>(n));
}

template <typename T>
BasicVar<T> weighted_sum(const BasicVar<T>& a, const BasicTensor<T>& weights) {
    const BasicTensor<T>& x = a.value();
    if (weights.size() != x.size()) {
        throw ShapeError("weighted_sum", "numel", static_cast<long>(x.size()), static_cast<long>(weights.size()));
    }
    T acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += weights[i] * x[i];
    return a.tape().record("weighted_sum", BasicTensor<T>::scalar(acc), {a},
                           [a, weights](BasicTape<T>& tape, std::size_t self) {
                               const T g = tape.grad(self)[0];
                               auto& ga = tape.grad_accumulator(a.id());
                               for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * weights[i];
                           });
}

template <typename T>
BasicVar<T> gather(const BasicVar<T>& a, const std::vector<std::size_t>& indices) {
    const BasicTensor<T>& x = a.value();
    BasicTensor<T> out(Shape{static_cast<int>(indices.size())});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= x.size()) {
            throw ShapeError("gather", "index", static_cast<long>(x.size()) - 1, static_cast<long>(indices[i]));
        }
        out[i] = x[indices[i]];
    }
    return a.tape().record("gather", std::move(out), {a}, [a, indices](BasicTape<T>& tape, std::size_t self) {
        const BasicTensor<T>& g = tape.grad(self);
        auto& ga = tape.grad_accumulator(a.id());
        for (std::size_t i = 0; i < indices.size(); ++i) ga[indices[i]] += g[i];
    });
}

#define CANOPY_INSTANTIATE_OPS(T)                                                         \
    template BasicVar<T> add(const BasicVar<T>&, const BasicVar<T>&);                     \
    template BasicVar<T> sub(const BasicVar<T>&, const BasicVar<T>&);                     \
    template BasicVar<T> mul(const BasicVar<T>&, const BasicVar<T>&);                     \
    template BasicVar<T> scale(const BasicVar<T>&, T);                                    \
    template BasicVar<T> add_scalar(const BasicVar<T>&, T);                               \
    template BasicVar<T> exp(const BasicVar<T>&);                                         \
    template BasicVar<T> relu(const BasicVar<T>&);                                        \
    template BasicVar<T> clamp(const BasicVar<T>&, T, T);                                 \
    template BasicVar<T> sum(const BasicVar<T>&);                                         \
    template BasicVar<T> mean(const BasicVar<T>&);                                        \
    template BasicVar<T> weighted_sum(const BasicVar<T>&, const BasicTensor<T>&);         \
    template BasicVar<T> gather(const BasicVar<T>&, const std::vector<std::size_t>&);

CANOPY_INSTANTIATE_OPS(float)
CANOPY_INSTANTIATE_OPS(double)

}  // namespace canopy::numerics
