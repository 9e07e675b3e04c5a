#pragma once

// Routes element-type-generic op code to the dispatched float kernels or to
// the double-precision reference loops.

#include "canopy/numerics/kernels.hpp"
#include "kernels_generic.hpp"

namespace canopy::numerics::detail {

template <typename T>
struct Backend;

template <>
struct Backend<float> {
    static void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c) {
        kernels::active().gemm_nn(m, n, k, a, b, c);
    }
    static void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c) {
        kernels::active().gemm_tn(m, n, k, a, b, c);
    }
    static void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c) {
        kernels::active().gemm_nt(m, n, k, a, b, c);
    }
    static void axpy(std::size_t n, float a, const float* x, float* y) { kernels::active().axpy(n, a, x, y); }
    static float dot(std::size_t n, const float* x, const float* y) { return kernels::active().dot(n, x, y); }
    static void relu(std::size_t n, const float* x, float* y) { kernels::active().relu(n, x, y); }
    static void relu_backward(std::size_t n, const float* x, const float* dy, float* dx) {
        kernels::active().relu_backward(n, x, dy, dx);
    }
};

template <>
struct Backend<double> {
    static void gemm_nn(int m, int n, int k, const double* a, const double* b, double* c) {
        kernels::generic::gemm_nn(m, n, k, a, b, c);
    }
    static void gemm_tn(int m, int n, int k, const double* a, const double* b, double* c) {
        kernels::generic::gemm_tn(m, n, k, a, b, c);
    }
    static void gemm_nt(int m, int n, int k, const double* a, const double* b, double* c) {
        kernels::generic::gemm_nt(m, n, k, a, b, c);
    }
    static void axpy(std::size_t n, double a, const double* x, double* y) { kernels::generic::axpy(n, a, x, y); }
    static double dot(std::size_t n, const double* x, const double* y) { return kernels::generic::dot(n, x, y); }
    static void relu(std::size_t n, const double* x, double* y) { kernels::generic::relu(n, x, y); }
    static void relu_backward(std::size_t n, const double* x, const double* dy, double* dx) {
        kernels::generic::relu_backward(n, x, dy, dx);
    }
};

}  // namespace canopy::numerics::detail
