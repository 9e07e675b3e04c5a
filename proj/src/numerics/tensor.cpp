#include "canopy/numerics/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <type_traits>

namespace canopy::numerics {

Shape::Shape(std::initializer_list<int> dims) : Shape(std::vector<int>(dims)) {}

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] < 0) throw ShapeError("Shape", axis_name(dims_.size(), i), 0, dims_[i]);
    }
}

std::size_t Shape::numel() const noexcept {
    if (dims_.empty()) return 0;
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                           [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

std::string Shape::str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) os << (i ? "," : "") << dims_[i];
    os << ']';
    return os.str();
}

std::string axis_name(std::size_t rank, std::size_t axis) {
    if (rank == 4) {
        static const char* names[] = {"batch", "channels", "height", "width"};
        return names[axis];
    }
    return "axis" + std::to_string(axis);
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, T fill)
    : shape_(std::move(shape)), values_(shape_.numel(), fill) {}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_.numel() != values_.size()) {
        throw ShapeError("Tensor", "numel", static_cast<long>(shape_.numel()),
                         static_cast<long>(values_.size()));
    }
}

template <typename T>
std::size_t BasicTensor<T>::offset4(int b, int c, int y, int x) const {
    const auto& d = shape_.dims();
    return ((static_cast<std::size_t>(b) * d[1] + c) * d[2] + y) * d[3] + x;
}

template <typename T>
T& BasicTensor<T>::at(int b, int c, int y, int x) {
    return values_[offset4(b, c, y, x)];
}

template <typename T>
const T& BasicTensor<T>::at(int b, int c, int y, int x) const {
    return values_[offset4(b, c, y, x)];
}

template <typename T>
T BasicTensor<T>::item() const {
    if (values_.size() != 1) throw ShapeError("item", "numel", 1, static_cast<long>(values_.size()));
    return values_[0];
}

template <typename T>
void BasicTensor<T>::fill(T v) {
    std::fill(values_.begin(), values_.end(), v);
}

template <typename T>
bool BasicTensor<T>::all_finite() const noexcept {
    // Branch-free exponent test so the scan vectorizes.
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    constexpr Bits exponent = sizeof(T) == 4 ? Bits(0x7f800000u) : Bits(0x7ff0000000000000ull);
    Bits any = 0;
    for (T v : values_) {
        const Bits b = std::bit_cast<Bits>(v);
        any |= static_cast<Bits>((b & exponent) == exponent);
    }
    return any == 0;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::reshaped(Shape shape) const {
    return BasicTensor(std::move(shape), values_);
}

template <typename T>
void require_rank4(const BasicTensor<T>& t, const std::string& op) {
    if (t.shape().rank() != 4) throw ShapeError(op, "rank", 4, static_cast<long>(t.shape().rank()));
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template void require_rank4(const BasicTensor<float>&, const std::string&);
template void require_rank4(const BasicTensor<double>&, const std::string&);

}  // namespace canopy::numerics
