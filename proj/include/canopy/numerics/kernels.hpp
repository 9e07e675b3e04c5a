#pragma once

// Inner-loop kernels behind the tensor ops. Every kernel has a portable
// scalar reference; AVX2+FMA variants are chosen at runtime when the CPU
// supports them. Within one ISA a kernel applies the same operation sequence
// to every output element regardless of its position in a vector lane, which
// keeps fully-convolutional inference position independent.

#include <cstddef>
#include <cstdint>

namespace canopy::numerics::kernels {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;

struct AdamCoefficients {
    float learning_rate;
    float beta1;
    float beta2;
    float epsilon;
    float bias_correction1;  // 1 - beta1^t
    float bias_correction2;  // 1 - beta2^t
};

struct FuseArgs {
    int dates = 0;
    std::size_t pixels = 0;
    const float* const* mean = nullptr;      // [dates][pixels]
    const float* const* variance = nullptr;  // [dates][pixels], > 0 where valid
    const std::uint8_t* const* valid = nullptr;
    double variance_floor = 0.0;
    double* out_mean = nullptr;
    double* out_variance = nullptr;
    std::uint8_t* out_valid = nullptr;
};

struct KernelTable {
    Isa isa;
    // c[m,n] += a[m,k] * b[k,n]
    void (*gemm_nn)(int m, int n, int k, const float* a, const float* b, float* c);
    // c[m,n] += a[k,m]^T * b[k,n]
    void (*gemm_tn)(int m, int n, int k, const float* a, const float* b, float* c);
    // c[m,n] += a[m,k] * b[n,k]^T
    void (*gemm_nt)(int m, int n, int k, const float* a, const float* b, float* c);
    // y += a * x
    void (*axpy)(std::size_t n, float a, const float* x, float* y);
    float (*dot)(std::size_t n, const float* x, const float* y);
    void (*relu)(std::size_t n, const float* x, float* y);
    // dx += dy where x > 0
    void (*relu_backward)(std::size_t n, const float* x, const float* dy, float* dx);
    void (*adam)(std::size_t n, float* param, const float* grad, float* m, float* v,
                 const AdamCoefficients& coeff);
    // Inverse-variance fusion with the weighted law of total variance.
    void (*fuse)(const FuseArgs& args);
};

const KernelTable& scalar_table() noexcept;
/// Null when the AVX2 translation unit was not built.
const KernelTable* avx2_table() noexcept;

/// The table used by all tensor ops. Defaults to the best supported ISA; the
/// CANOPY_ISA environment variable ("scalar" or "avx2") overrides it.
const KernelTable& active() noexcept;

/// Switches the active table. Not thread safe; intended for tests and for
/// pinning a run to the ISA recorded in a manifest.
void set_active(Isa isa);

}  // namespace canopy::numerics::kernels
