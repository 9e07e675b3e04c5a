#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "canopy/numerics/error.hpp"

namespace canopy::numerics {

/// Extents of a dense row-major tensor. 4-D tensors are laid out as
/// (batch, channels, height, width).
class Shape {
public:
    Shape() = default;
    Shape(std::initializer_list<int> dims);
    explicit Shape(std::vector<int> dims);

    std::size_t rank() const noexcept { return dims_.size(); }
    int operator[](std::size_t axis) const { return dims_.at(axis); }
    std::size_t numel() const noexcept;
    const std::vector<int>& dims() const noexcept { return dims_; }
    std::string str() const;

    bool operator==(const Shape&) const = default;

private:
    std::vector<int> dims_;
};

/// Name used in shape errors for axis `i` of a rank-`rank` tensor.
std::string axis_name(std::size_t rank, std::size_t axis);

template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape, T fill = T{0});
    BasicTensor(Shape shape, std::vector<T> values);

    static BasicTensor scalar(T v) { return BasicTensor(Shape{1}, std::vector<T>{v}); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    T* data() noexcept { return values_.data(); }
    const T* data() const noexcept { return values_.data(); }
    const std::vector<T>& storage() const noexcept { return values_; }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    /// 4-D element access (b, c, y, x).
    T& at(int b, int c, int y, int x);
    const T& at(int b, int c, int y, int x) const;

    T item() const;
    void fill(T v);
    bool all_finite() const noexcept;

    /// Same values viewed with different extents; element count must match.
    BasicTensor reshaped(Shape shape) const;

    template <typename U>
    BasicTensor<U> cast() const {
        std::vector<U> out(values_.begin(), values_.end());
        return BasicTensor<U>(shape_, std::move(out));
    }

    bool operator==(const BasicTensor&) const = default;

private:
    std::size_t offset4(int b, int c, int y, int x) const;

    Shape shape_;
    std::vector<T> values_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

extern template class BasicTensor<float>;
extern template class BasicTensor<double>;

/// Throws ShapeError when `t` is not rank 4.
template <typename T>
void require_rank4(const BasicTensor<T>& t, const std::string& op);

}  // namespace canopy::numerics
