#include "kernels_generic.hpp"

namespace canopy::numerics::kernels {
namespace {

void adam_scalar(std::size_t n, float* param, const float* grad, float* m, float* v,
                 const AdamCoefficients& c) {
    generic::adam<float>(n, param, grad, m, v, c.learning_rate, c.beta1, c.beta2, c.epsilon,
                         c.bias_correction1, c.bias_correction2);
}

constexpr KernelTable kScalar{
    Isa::scalar,
    &generic::gemm_nn<float>,
    &generic::gemm_tn<float>,
    &generic::gemm_nt<float>,
    &generic::axpy<float>,
    &generic::dot<float>,
    &generic::relu<float>,
    &generic::relu_backward<float>,
    &adam_scalar,
    &generic::fuse,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace canopy::numerics::kernels
