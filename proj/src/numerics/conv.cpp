#include "canopy/numerics/conv.hpp"

#include "backend.hpp"

namespace canopy::numerics {
namespace {

struct Dims {
    int batch, channels, height, width;
    std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
};

template <typename T>
Dims dims_of(const BasicVar<T>& x, const char* op) {
    const Shape& s = x.shape();
    if (s.rank() != 4) throw ShapeError(op, "rank", 4, static_cast<long>(s.rank()));
    if (s[2] < 1) throw ShapeError(op, "height", 1, s[2]);
    if (s[3] < 1) throw ShapeError(op, "width", 1, s[3]);
    return {s[0], s[1], s[2], s[3]};
}

void expect_dims(const Shape& got, const Shape& want, const char* op, const char* tensor) {
    static const char* weight_axes[] = {"out_channels", "in_channels", "kernel_height", "kernel_width"};
    if (got.rank() != want.rank()) {
        throw ShapeError(std::string(op) + " " + tensor, "rank", static_cast<long>(want.rank()),
                         static_cast<long>(got.rank()));
    }
    for (std::size_t i = 0; i < want.rank(); ++i) {
        if (got[i] != want[i]) {
            const std::string axis = want.rank() == 4 ? weight_axes[i] : "out_channels";
            throw ShapeError(std::string(op) + " " + tensor, axis, want[i], got[i]);
        }
    }
}

// cols[(c*9 + ky*3 + kx), y*W + x] = x[c, y+ky-1, x+kx-1], zero outside.
template <typename T>
void im2col(const T* x, int channels, int h, int w, T* cols) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                T* row = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
                const int dy = ky - 1, dx = kx - 1;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy;
                    T* out = row + static_cast<std::size_t>(y) * w;
                    if (sy < 0 || sy >= h) {
                        for (int xx = 0; xx < w; ++xx) out[xx] = T(0);
                        continue;
                    }
                    const T* src = x + (static_cast<std::size_t>(c) * h + sy) * w;
                    for (int xx = 0; xx < w; ++xx) {
                        const int sx = xx + dx;
                        out[xx] = (sx >= 0 && sx < w) ? src[sx] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_add(const T* cols, int channels, int h, int w, T* dx) {
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < channels; ++c) {
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const T* row = cols + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * plane;
                const int dy = ky - 1, dxo = kx - 1;
                for (int y = 0; y < h; ++y) {
                    const int sy = y + dy;
                    if (sy < 0 || sy >= h) continue;
                    T* dst = dx + (static_cast<std::size_t>(c) * h + sy) * w;
                    const T* src = row + static_cast<std::size_t>(y) * w;
                    for (int xx = 0; xx < w; ++xx) {
                        const int sx = xx + dxo;
                        if (sx >= 0 && sx < w) dst[sx] += src[xx];
                    }
                }
            }
        }
    }
}

template <typename T>
void fill_bias(T* out, int channels, std::size_t plane, const T* bias) {
    for (int c = 0; c < channels; ++c) {
        const T b = bias ? bias[c] : T(0);
        T* row = out + static_cast<std::size_t>(c) * plane;
        for (std::size_t i = 0; i < plane; ++i) row[i] = b;
    }
}

template <typename T>
void add_bias_grad(const T* g, int channels, std::size_t plane, T* gb) {
    for (int c = 0; c < channels; ++c) {
        const T* row = g + static_cast<std::size_t>(c) * plane;
        T acc = 0;
        for (std::size_t i = 0; i < plane; ++i) acc += row[i];
        gb[c] += acc;
    }
}


}  // namespace

template <typename T>
BasicVar<T> conv3x3(const BasicVar<T>& x, const BasicVar<T>& weight, const BasicVar<T>& bias) {
    const Dims d = dims_of(x, "conv3x3");
    const int cout = weight.shape().rank() == 4 ? weight.shape()[0] : 0;
    expect_dims(weight.shape(), Shape{cout, d.channels, 3, 3}, "conv3x3", "weight");
    if (bias.valid()) expect_dims(bias.shape(), Shape{cout}, "conv3x3", "bias");

    const std::size_t plane = d.plane();
    const int kdim = d.channels * 9;
    BasicTensor<T> out(Shape{d.batch, cout, d.height, d.width});
    std::vector<T> cols(static_cast<std::size_t>(kdim) * plane);
    const T* bptr = bias.valid() ? bias.value().data() : nullptr;
    for (int b = 0; b < d.batch; ++b) {
        const T* xb = x.value().data() + static_cast<std::size_t>(b) * d.channels * plane;
        T* ob = out.data() + static_cast<std::size_t>(b) * cout * plane;
        im2col(xb, d.channels, d.height, d.width, cols.data());
        fill_bias(ob, cout, plane, bptr);
        detail::Backend<T>::gemm_nn(cout, static_cast<int>(plane), kdim, weight.value().data(), cols.data(), ob);
    }

    return x.tape().record("conv3x3", std::move(out), {x, weight, bias},
                           [x, weight, bias, d, cout](BasicTape<T>& tape, std::size_t self) {
        const std::size_t plane = d.plane();
        const int kdim = d.channels * 9;
        const BasicTensor<T>& g = tape.grad(self);
        std::vector<T> cols(static_cast<std::size_t>(kdim) * plane);
        for (int b = 0; b < d.batch; ++b) {
            const T* gb = g.data() + static_cast<std::size_t>(b) * cout * plane;
            if (weight.requires_grad()) {
                const T* xb = x.value().data() + static_cast<std::size_t>(b) * d.channels * plane;
                im2col(xb, d.channels, d.height, d.width, cols.data());
                detail::Backend<T>::gemm_nt(cout, kdim, static_cast<int>(plane), gb, cols.data(),
                                            tape.grad_accumulator(weight.id()).data());
            }
            if (x.requires_grad()) {
                std::fill(cols.begin(), cols.end(), T(0));
                detail::Backend<T>::gemm_tn(kdim, static_cast<int>(plane), cout, weight.value().data(), gb,
                                            cols.data());
                T* dxb = tape.grad_accumulator(x.id()).data() + static_cast<std::size_t>(b) * d.channels * plane;
                col2im_add(cols.data(), d.channels, d.height, d.width, dxb);
            }
            if (bias.valid() && bias.requires_grad()) {
                add_bias_grad(gb, cout, plane, tape.grad_accumulator(bias.id()).data());
            }
        }
    });
}

namespace {

// Depthwise kernels work on planes padded by one zero pixel on every side, so
// each tap is a single contiguous axpy over the plane. Only positions that map
// to real pixels are read back; the rest is scratch.
struct PaddedPlane {
    int height, width;
    std::size_t stride() const { return static_cast<std::size_t>(width) + 2; }
    std::size_t size() const { return (static_cast<std::size_t>(height) + 2) * stride(); }
    std::size_t first() const { return stride() + 1; }
    std::size_t span() const { return (static_cast<std::size_t>(height) - 1) * stride() + width; }
    std::ptrdiff_t offset(int ky, int kx) const {
        return static_cast<std::ptrdiff_t>(ky - 1) * static_cast<std::ptrdiff_t>(stride()) + (kx - 1);
    }
};

template <typename T>
std::vector<T> pad_planes(const T* x, std::size_t planes, const PaddedPlane& pp) {
    std::vector<T> out(planes * pp.size(), T(0));
    for (std::size_t p = 0; p < planes; ++p) {
        for (int y = 0; y < pp.height; ++y) {
            const T* src = x + (p * pp.height + y) * static_cast<std::size_t>(pp.width);
            T* dst = out.data() + p * pp.size() + (y + 1) * pp.stride() + 1;
            std::copy(src, src + pp.width, dst);
        }
    }
    return out;
}

template <typename T, bool Accumulate>
void unpad_planes(const T* xp, std::size_t planes, const PaddedPlane& pp, T* out) {
    for (std::size_t p = 0; p < planes; ++p) {
        for (int y = 0; y < pp.height; ++y) {
            const T* src = xp + p * pp.size() + (y + 1) * pp.stride() + 1;
            T* dst = out + (p * pp.height + y) * static_cast<std::size_t>(pp.width);
            for (int x = 0; x < pp.width; ++x) {
                if constexpr (Accumulate) {
                    dst[x] += src[x];
                } else {
                    dst[x] = src[x];
                }
            }
        }
    }
}

}  // namespace

template <typename T>
BasicVar<T> depthwise_conv3x3(const BasicVar<T>& x, const BasicVar<T>& weight) {
    const Dims d = dims_of(x, "depthwise_conv3x3");
    expect_dims(weight.shape(), Shape{d.channels, 1, 3, 3}, "depthwise_conv3x3", "weight");

    const PaddedPlane pp{d.height, d.width};
    const std::size_t planes = static_cast<std::size_t>(d.batch) * d.channels;
    const std::vector<T> xp = pad_planes(x.value().data(), planes, pp);
    std::vector<T> op(planes * pp.size(), T(0));
    const T* wv = weight.value().data();
    for (std::size_t p = 0; p < planes; ++p) {
        const std::size_t c = p % static_cast<std::size_t>(d.channels);
        const std::size_t base = p * pp.size() + pp.first();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                detail::Backend<T>::axpy(pp.span(), wv[c * 9 + ky * 3 + kx], xp.data() + base + pp.offset(ky, kx),
                                         op.data() + base);
            }
        }
    }
    BasicTensor<T> out(x.shape());
    unpad_planes<T, false>(op.data(), planes, pp, out.data());

    return x.tape().record("depthwise_conv3x3", std::move(out), {x, weight},
                           [x, weight, d](BasicTape<T>& tape, std::size_t self) {
        const PaddedPlane pp{d.height, d.width};
        const std::size_t planes = static_cast<std::size_t>(d.batch) * d.channels;
        const std::vector<T> gp = pad_planes(tape.grad(self).data(), planes, pp);
        const T* wv = weight.value().data();
        if (x.requires_grad()) {
            std::vector<T> dxp(planes * pp.size(), T(0));
            for (std::size_t p = 0; p < planes; ++p) {
                const std::size_t c = p % static_cast<std::size_t>(d.channels);
                const std::size_t base = p * pp.size() + pp.first();
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        detail::Backend<T>::axpy(pp.span(), wv[c * 9 + ky * 3 + kx], gp.data() + base,
                                                 dxp.data() + base + pp.offset(ky, kx));
                    }
                }
            }
            unpad_planes<T, true>(dxp.data(), planes, pp, tape.grad_accumulator(x.id()).data());
        }
        if (weight.requires_grad()) {
            const std::vector<T> xp = pad_planes(x.value().data(), planes, pp);
            T* dw = tape.grad_accumulator(weight.id()).data();
            for (std::size_t p = 0; p < planes; ++p) {
                const std::size_t c = p % static_cast<std::size_t>(d.channels);
                const std::size_t base = p * pp.size() + pp.first();
                for (int k = 0; k < 9; ++k) {
                    dw[c * 9 + k] += detail::Backend<T>::dot(pp.span(), gp.data() + base,
                                                             xp.data() + base + pp.offset(k / 3, k % 3));
                }
            }
        }
    });
}

template <typename T>
BasicVar<T> pointwise_conv(const BasicVar<T>& x, const BasicVar<T>& weight, const BasicVar<T>& bias) {
    const Dims d = dims_of(x, "pointwise_conv");
    const int cout = weight.shape().rank() == 4 ? weight.shape()[0] : 0;
    expect_dims(weight.shape(), Shape{cout, d.channels, 1, 1}, "pointwise_conv", "weight");
    if (bias.valid()) expect_dims(bias.shape(), Shape{cout}, "pointwise_conv", "bias");

    const std::size_t plane = d.plane();
    BasicTensor<T> out(Shape{d.batch, cout, d.height, d.width});
    const T* bptr = bias.valid() ? bias.value().data() : nullptr;
    for (int b = 0; b < d.batch; ++b) {
        T* ob = out.data() + static_cast<std::size_t>(b) * cout * plane;
        fill_bias(ob, cout, plane, bptr);
        detail::Backend<T>::gemm_nn(cout, static_cast<int>(plane), d.channels, weight.value().data(),
                                    x.value().data() + static_cast<std::size_t>(b) * d.channels * plane, ob);
    }

    return x.tape().record("pointwise_conv", std::move(out), {x, weight, bias},
                           [x, weight, bias, d, cout](BasicTape<T>& tape, std::size_t self) {
        const std::size_t plane = d.plane();
        const BasicTensor<T>& g = tape.grad(self);
        for (int b = 0; b < d.batch; ++b) {
            const T* gb = g.data() + static_cast<std::size_t>(b) * cout * plane;
            const std::size_t xoff = static_cast<std::size_t>(b) * d.channels * plane;
            if (weight.requires_grad()) {
                detail::Backend<T>::gemm_nt(cout, d.channels, static_cast<int>(plane), gb, x.value().data() + xoff,
                                            tape.grad_accumulator(weight.id()).data());
            }
            if (x.requires_grad()) {
                detail::Backend<T>::gemm_tn(d.channels, static_cast<int>(plane), cout, weight.value().data(), gb,
                                            tape.grad_accumulator(x.id()).data() + xoff);
            }
            if (bias.valid() && bias.requires_grad()) {
                add_bias_grad(gb, cout, plane, tape.grad_accumulator(bias.id()).data());
            }
        }
    });
}

template <typename T>
BasicVar<T> conv2d_forward(const BasicVar<T>& x, const ConvSpec& spec, const ConvParams<T>& params) {
    const Dims d = dims_of(x, "conv2d_forward");
    if (d.channels != spec.in_channels) throw ShapeError("conv2d_forward", "channels", spec.in_channels, d.channels);
    expect_dims(params.weight.shape(), spec.weight_shape(), "conv2d_forward", "weight");
    if (params.bias.valid()) expect_dims(params.bias.shape(), spec.bias_shape(), "conv2d_forward", "bias");
    if (!spec.separable) return conv3x3(x, params.weight, params.bias);
    if (!params.depthwise.valid()) throw Error("conv2d_forward: separable spec requires depthwise weights");
    expect_dims(params.depthwise.shape(), spec.depthwise_shape(), "conv2d_forward", "depthwise");
    return pointwise_conv(depthwise_conv3x3(x, params.depthwise), params.weight, params.bias);
}

#define CANOPY_INSTANTIATE_CONV(T)                                                                    \
    template BasicVar<T> conv3x3(const BasicVar<T>&, const BasicVar<T>&, const BasicVar<T>&);         \
    template BasicVar<T> depthwise_conv3x3(const BasicVar<T>&, const BasicVar<T>&);                   \
    template BasicVar<T> pointwise_conv(const BasicVar<T>&, const BasicVar<T>&, const BasicVar<T>&);  \
    template BasicVar<T> conv2d_forward(const BasicVar<T>&, const ConvSpec&, const ConvParams<T>&);

CANOPY_INSTANTIATE_CONV(float)
CANOPY_INSTANTIATE_CONV(double)

}  // namespace canopy::numerics
