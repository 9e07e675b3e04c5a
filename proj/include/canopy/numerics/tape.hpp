#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "canopy/numerics/tensor.hpp"

namespace canopy::numerics {

template <typename T>
class BasicTape;

/// Handle to a value recorded on a tape. Cheap to copy; valid as long as the
/// tape it came from.
template <typename T>
class BasicVar {
public:
    BasicVar() = default;
    BasicVar(BasicTape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

    bool valid() const noexcept { return tape_ != nullptr; }
    BasicTape<T>& tape() const { return *tape_; }
    std::size_t id() const noexcept { return id_; }

    const BasicTensor<T>& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;
    /// Gradient after backward(); zeros when the loss does not depend on it.
    const BasicTensor<T>& grad() const;

private:
    BasicTape<T>* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward()
/// walks them in reverse, calling each node's pullback with its upstream
/// gradient. A tape supports exactly one backward pass.
template <typename T>
class BasicTape {
public:
    using Var = BasicVar<T>;
    using Pullback = std::function<void(BasicTape&, std::size_t)>;

    BasicTape() = default;
    BasicTape(const BasicTape&) = delete;
    BasicTape& operator=(const BasicTape&) = delete;

    Var constant(BasicTensor<T> value);
    Var parameter(BasicTensor<T> value);

    /// Appends an op result. The node requires grad iff any input does; the
    /// pullback is dropped otherwise. Throws NumericError when finite inputs
    /// produced non-finite output.
    Var record(const char* op, BasicTensor<T> value, std::initializer_list<Var> inputs, Pullback pullback);

    void backward(const Var& loss);
    bool consumed() const noexcept { return consumed_; }

    const BasicTensor<T>& value(std::size_t id) const { return nodes_.at(id).value; }
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    /// Upstream gradient of node `id`; zeros if nothing flowed into it.
    const BasicTensor<T>& grad(std::size_t id);
    /// Gradient buffer of `id`, zero-initialised on first touch. Pullbacks
    /// accumulate into it.
    BasicTensor<T>& grad_accumulator(std::size_t id);

    std::size_t size() const noexcept { return nodes_.size(); }

    /// When enabled, piecewise ops append the branch taken by every element,
    /// so callers can detect finite-difference probes that cross a kink.
    void set_track_kinks(bool on) noexcept { track_kinks_ = on; }
    bool tracking_kinks() const noexcept { return track_kinks_; }
    void note_kinks(std::span<const std::uint8_t> branches);
    const std::vector<std::uint8_t>& kink_signature() const noexcept { return kinks_; }

private:
    struct Node {
        const char* op = "";
        BasicTensor<T> value;
        BasicTensor<T> grad;
        bool requires_grad = false;
        bool finite = true;
        Pullback pullback;
    };

    std::deque<Node> nodes_;
    bool consumed_ = false;
    bool track_kinks_ = false;
    std::vector<std::uint8_t> kinks_;
};

using Tape = BasicTape<float>;
using Var = BasicVar<float>;

extern template class BasicVar<float>;
extern template class BasicVar<double>;
extern template class BasicTape<float>;
extern template class BasicTape<double>;

}  // namespace canopy::numerics
