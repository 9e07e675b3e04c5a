#pragma once

// Portable reference loops, shared by the scalar float table and by the
// double-precision tape used for gradient verification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "canopy/numerics/kernels.hpp"

namespace canopy::numerics::kernels::generic {

template <typename T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c) {
    for (int i = 0; i < m; ++i) {
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const T aip = a[static_cast<std::size_t>(i) * k + p];
            const T* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

template <typename T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c) {
    for (int i = 0; i < m; ++i) {
        T* crow = c + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const T api = a[static_cast<std::size_t>(p) * m + i];
            const T* brow = b + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += api * brow[j];
        }
    }
}

template <typename T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<std::size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            const T* brow = b + static_cast<std::size_t>(j) * k;
            T acc = 0;
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            c[static_cast<std::size_t>(i) * n + j] += acc;
        }
    }
}

template <typename T>
void axpy(std::size_t n, T a, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
T dot(std::size_t n, const T* x, const T* y) {
    T acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

template <typename T>
void relu(std::size_t n, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

template <typename T>
void relu_backward(std::size_t n, const T* x, const T* dy, T* dx) {
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] > T(0)) dx[i] += dy[i];
    }
}

template <typename T>
void adam(std::size_t n, T* param, const T* grad, T* m, T* v, T lr, T beta1, T beta2, T eps,
          T bc1, T bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        const T g = grad[i];
        m[i] = beta1 * m[i] + (T(1) - beta1) * g;
        v[i] = beta2 * v[i] + (T(1) - beta2) * (g * g);
        const T m_hat = m[i] / bc1;
        const T v_hat = v[i] / bc2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

inline void fuse(const FuseArgs& a) {
    for (std::size_t i = 0; i < a.pixels; ++i) {
        double wsum = 0.0;
        int count = 0;
        for (int t = 0; t < a.dates; ++t) {
            if (!a.valid[t][i]) continue;
            const double var = std::max(static_cast<double>(a.variance[t][i]), a.variance_floor);
            wsum += 1.0 / var;
            ++count;
        }
        if (count == 0) {
            a.out_mean[i] = 0.0;
            a.out_variance[i] = 0.0;
            a.out_valid[i] = 0;
            continue;
        }
        double mean = 0.0;
        for (int t = 0; t < a.dates; ++t) {
            if (!a.valid[t][i]) continue;
            const double var = std::max(static_cast<double>(a.variance[t][i]), a.variance_floor);
            mean += ((1.0 / var) / wsum) * static_cast<double>(a.mean[t][i]);
        }
        double spread = 0.0;
        double within = 0.0;
        for (int t = 0; t < a.dates; ++t) {
            if (!a.valid[t][i]) continue;
            const double var = std::max(static_cast<double>(a.variance[t][i]), a.variance_floor);
            const double p = (1.0 / var) / wsum;
            const double d = static_cast<double>(a.mean[t][i]) - mean;
            spread += p * (d * d);
            within += p * var;
        }
        a.out_mean[i] = mean;
        a.out_variance[i] = spread + within;
        a.out_valid[i] = 1;
    }
}

}  // namespace canopy::numerics::kernels::generic
