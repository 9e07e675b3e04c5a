#include "canopy/numerics/tape.hpp"

namespace canopy::numerics {

template <typename T>
const BasicTensor<T>& BasicVar<T>::value() const {
    return tape_->value(id_);
}

template <typename T>
bool BasicVar<T>::requires_grad() const {
    return tape_->requires_grad(id_);
}

template <typename T>
const BasicTensor<T>& BasicVar<T>::grad() const {
    return tape_->grad(id_);
}

template <typename T>
typename BasicTape<T>::Var BasicTape<T>::constant(BasicTensor<T> value) {
    Node n;
    n.op = "constant";
    n.finite = value.all_finite();
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

template <typename T>
typename BasicTape<T>::Var BasicTape<T>::parameter(BasicTensor<T> value) {
    Node n;
    n.op = "parameter";
    n.finite = value.all_finite();
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

template <typename T>
typename BasicTape<T>::Var BasicTape<T>::record(const char* op, BasicTensor<T> value,
                                                std::initializer_list<Var> inputs, Pullback pullback) {
    if (consumed_) throw Error(std::string(op) + ": tape already used for backward; record a new forward pass");
    bool needs_grad = false;
    bool finite_in = true;
    for (const Var& in : inputs) {
        if (in.valid() && &in.tape() != this) throw Error(std::string(op) + ": operands live on different tapes");
        if (!in.valid()) continue;
        const Node& src = nodes_.at(in.id());
        needs_grad = needs_grad || src.requires_grad;
        finite_in = finite_in && src.finite;
    }
    const bool finite_out = value.all_finite();
    if (finite_in && !finite_out) {
        throw NumericError(std::string(op) + ": produced non-finite values from finite inputs");
    }
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.requires_grad = needs_grad;
    n.finite = finite_out;
    if (needs_grad) n.pullback = std::move(pullback);
    nodes_.push_back(std::move(n));
    return Var(this, nodes_.size() - 1);
}

template <typename T>
const BasicTensor<T>& BasicTape<T>::grad(std::size_t id) {
    return grad_accumulator(id);
}

template <typename T>
BasicTensor<T>& BasicTape<T>::grad_accumulator(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.shape() != n.value.shape()) n.grad = BasicTensor<T>(n.value.shape(), T{0});
    return n.grad;
}

template <typename T>
void BasicTape<T>::backward(const Var& loss) {
    if (!loss.valid() || &loss.tape() != this) throw Error("backward: loss is not recorded on this tape");
    if (consumed_) throw Error("backward: called twice on the same tape without a new forward pass");
    const Node& root = nodes_.at(loss.id());
    if (root.value.size() != 1) {
        throw ShapeError("backward", "numel", 1, static_cast<long>(root.value.size()));
    }
    consumed_ = true;
    grad_accumulator(loss.id()).fill(T{1});
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || !n.pullback) continue;
        if (n.grad.shape() != n.value.shape()) continue;  // nothing flowed here
        n.pullback(*this, i);
    }
}

template <typename T>
void BasicTape<T>::note_kinks(std::span<const std::uint8_t> branches) {
    if (track_kinks_) kinks_.insert(kinks_.end(), branches.begin(), branches.end());
}

template class BasicVar<float>;
template class BasicVar<double>;
template class BasicTape<float>;
template class BasicTape<double>;

}  // namespace canopy::numerics
