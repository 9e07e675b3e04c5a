// Built with -mavx2 -mfma. Only reached through avx2_table() after the
// dispatcher has confirmed CPU support, so nothing here may be inlined into
// other translation units: keep every helper in the anonymous namespace.

#include "canopy/numerics/kernels.hpp"

#if defined(CANOPY_HAVE_AVX2_TU) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace canopy::numerics::kernels {
namespace {

inline __m256i tail_mask(int count) {
    alignas(32) static const std::int32_t table[16] = {-1, -1, -1, -1, -1, -1, -1, -1,
                                                       0,  0,  0,  0,  0,  0,  0,  0};
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(table + 8 - count));
}

inline __m256i tail_mask_pd(int count) {
    alignas(32) static const std::int64_t table[8] = {-1, -1, -1, -1, 0, 0, 0, 0};
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(table + 4 - count));
}

// Rows [0, R) of c += a * b, where a is addressed as a[i*a_si + p*a_sp].
// Each output element accumulates over p in order with one FMA per term, so
// the lane an element occupies never changes its value.
template <int R>
inline void gemm_rows(int n, int k, const float* a, std::size_t a_si, std::size_t a_sp,
                      const float* b, float* c) {
    int j = 0;
    for (; j + 16 <= n; j += 16) {
        __m256 lo[R], hi[R];
        for (int r = 0; r < R; ++r) {
            lo[r] = _mm256_loadu_ps(c + static_cast<std::size_t>(r) * n + j);
            hi[r] = _mm256_loadu_ps(c + static_cast<std::size_t>(r) * n + j + 8);
        }
        for (int p = 0; p < k; ++p) {
            const float* brow = b + static_cast<std::size_t>(p) * n + j;
            const __m256 b0 = _mm256_loadu_ps(brow);
            const __m256 b1 = _mm256_loadu_ps(brow + 8);
            for (int r = 0; r < R; ++r) {
                const __m256 av = _mm256_set1_ps(a[r * a_si + p * a_sp]);
                lo[r] = _mm256_fmadd_ps(av, b0, lo[r]);
                hi[r] = _mm256_fmadd_ps(av, b1, hi[r]);
            }
        }
        for (int r = 0; r < R; ++r) {
            _mm256_storeu_ps(c + static_cast<std::size_t>(r) * n + j, lo[r]);
            _mm256_storeu_ps(c + static_cast<std::size_t>(r) * n + j + 8, hi[r]);
        }
    }
    for (; j + 8 <= n; j += 8) {
        __m256 acc[R];
        for (int r = 0; r < R; ++r) acc[r] = _mm256_loadu_ps(c + static_cast<std::size_t>(r) * n + j);
        for (int p = 0; p < k; ++p) {
            const __m256 bv = _mm256_loadu_ps(b + static_cast<std::size_t>(p) * n + j);
            for (int r = 0; r < R; ++r) {
                const __m256 av = _mm256_set1_ps(a[r * a_si + p * a_sp]);
                acc[r] = _mm256_fmadd_ps(av, bv, acc[r]);
            }
        }
        for (int r = 0; r < R; ++r) _mm256_storeu_ps(c + static_cast<std::size_t>(r) * n + j, acc[r]);
    }
    if (j < n) {
        const __m256i mask = tail_mask(n - j);
        __m256 acc[R];
        for (int r = 0; r < R; ++r) acc[r] = _mm256_maskload_ps(c + static_cast<std::size_t>(r) * n + j, mask);
        for (int p = 0; p < k; ++p) {
            const __m256 bv = _mm256_maskload_ps(b + static_cast<std::size_t>(p) * n + j, mask);
            for (int r = 0; r < R; ++r) {
                const __m256 av = _mm256_set1_ps(a[r * a_si + p * a_sp]);
                acc[r] = _mm256_fmadd_ps(av, bv, acc[r]);
            }
        }
        for (int r = 0; r < R; ++r) _mm256_maskstore_ps(c + static_cast<std::size_t>(r) * n + j, mask, acc[r]);
    }
}

void gemm_strided(int m, int n, int k, const float* a, std::size_t a_si, std::size_t a_sp,
                  const float* b, float* c) {
    int i = 0;
    for (; i + 6 <= m; i += 6) {
        gemm_rows<6>(n, k, a + i * a_si, a_si, a_sp, b, c + static_cast<std::size_t>(i) * n);
    }
    for (; i + 2 <= m; i += 2) {
        gemm_rows<2>(n, k, a + i * a_si, a_si, a_sp, b, c + static_cast<std::size_t>(i) * n);
    }
    for (; i < m; ++i) {
        gemm_rows<1>(n, k, a + i * a_si, a_si, a_sp, b, c + static_cast<std::size_t>(i) * n);
    }
}

void gemm_nn_avx2(int m, int n, int k, const float* a, const float* b, float* c) {
    gemm_strided(m, n, k, a, static_cast<std::size_t>(k), 1, b, c);
}

void gemm_tn_avx2(int m, int n, int k, const float* a, const float* b, float* c) {
    gemm_strided(m, n, k, a, 1, static_cast<std::size_t>(m), b, c);
}

inline float hsum(__m256 v) {
    const __m128 lo = _mm256_castps256_ps128(v);
    const __m128 hi = _mm256_extractf128_ps(v, 1);
    __m128 s = _mm_add_ps(lo, hi);
    s = _mm_add_ps(s, _mm_movehl_ps(s, s));
    s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
    return _mm_cvtss_f32(s);
}

float dot_avx2(std::size_t n, const float* x, const float* y) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    }
    if (i < n) {
        const __m256i mask = tail_mask(static_cast<int>(n - i));
        acc1 = _mm256_fmadd_ps(_mm256_maskload_ps(x + i, mask), _mm256_maskload_ps(y + i, mask), acc1);
    }
    return hsum(_mm256_add_ps(acc0, acc1));
}

// RI x RJ block of c += a * b^T: RI rows of a dotted with RJ rows of b.
template <int RI, int RJ>
inline void gemm_nt_block(int n, int k, const float* a, const float* b, float* c) {
    __m256 acc[RI][RJ];
    for (int r = 0; r < RI; ++r)
        for (int q = 0; q < RJ; ++q) acc[r][q] = _mm256_setzero_ps();
    int p = 0;
    for (; p + 8 <= k; p += 8) {
        __m256 bv[RJ];
        for (int q = 0; q < RJ; ++q) bv[q] = _mm256_loadu_ps(b + static_cast<std::size_t>(q) * k + p);
        for (int r = 0; r < RI; ++r) {
            const __m256 av = _mm256_loadu_ps(a + static_cast<std::size_t>(r) * k + p);
            for (int q = 0; q < RJ; ++q) acc[r][q] = _mm256_fmadd_ps(av, bv[q], acc[r][q]);
        }
    }
    if (p < k) {
        const __m256i mask = tail_mask(k - p);
        __m256 bv[RJ];
        for (int q = 0; q < RJ; ++q) bv[q] = _mm256_maskload_ps(b + static_cast<std::size_t>(q) * k + p, mask);
        for (int r = 0; r < RI; ++r) {
            const __m256 av = _mm256_maskload_ps(a + static_cast<std::size_t>(r) * k + p, mask);
            for (int q = 0; q < RJ; ++q) acc[r][q] = _mm256_fmadd_ps(av, bv[q], acc[r][q]);
        }
    }
    for (int r = 0; r < RI; ++r)
        for (int q = 0; q < RJ; ++q) c[static_cast<std::size_t>(r) * n + q] += hsum(acc[r][q]);
}

template <int RI>
inline void gemm_nt_rows(int n, int k, const float* a, const float* b, float* c) {
    int j = 0;
    for (; j + 2 <= n; j += 2) gemm_nt_block<RI, 2>(n, k, a, b + static_cast<std::size_t>(j) * k, c + j);
    for (; j < n; ++j) gemm_nt_block<RI, 1>(n, k, a, b + static_cast<std::size_t>(j) * k, c + j);
}

void gemm_nt_avx2(int m, int n, int k, const float* a, const float* b, float* c) {
    int i = 0;
    for (; i + 4 <= m; i += 4) {
        gemm_nt_rows<4>(n, k, a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n);
    }
    for (; i < m; ++i) {
        gemm_nt_rows<1>(n, k, a + static_cast<std::size_t>(i) * k, b, c + static_cast<std::size_t>(i) * n);
    }
}

void axpy_avx2(std::size_t n, float a, const float* x, float* y) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    }
    if (i < n) {
        const __m256i mask = tail_mask(static_cast<int>(n - i));
        const __m256 r = _mm256_fmadd_ps(av, _mm256_maskload_ps(x + i, mask), _mm256_maskload_ps(y + i, mask));
        _mm256_maskstore_ps(y + i, mask, r);
    }
}

void relu_avx2(std::size_t n, const float* x, float* y) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 v = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(y + i, _mm256_and_ps(v, _mm256_cmp_ps(v, zero, _CMP_GT_OQ)));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward_avx2(std::size_t n, const float* x, const float* dy, float* dx) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 keep = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        const __m256 g = _mm256_and_ps(_mm256_loadu_ps(dy + i), keep);
        _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), g));
    }
    for (; i < n; ++i) {
        if (x[i] > 0.0f) dx[i] += dy[i];
    }
}

void adam_avx2(std::size_t n, float* param, const float* grad, float* m, float* v,
               const AdamCoefficients& c) {
    const __m256 b1 = _mm256_set1_ps(c.beta1);
    const __m256 b2 = _mm256_set1_ps(c.beta2);
    const __m256 ob1 = _mm256_set1_ps(1.0f - c.beta1);
    const __m256 ob2 = _mm256_set1_ps(1.0f - c.beta2);
    const __m256 bc1 = _mm256_set1_ps(c.bias_correction1);
    const __m256 bc2 = _mm256_set1_ps(c.bias_correction2);
    const __m256 lr = _mm256_set1_ps(c.learning_rate);
    const __m256 eps = _mm256_set1_ps(c.epsilon);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 g = _mm256_loadu_ps(grad + i);
        const __m256 mi = _mm256_add_ps(_mm256_mul_ps(b1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(ob1, g));
        const __m256 vi = _mm256_add_ps(_mm256_mul_ps(b2, _mm256_loadu_ps(v + i)),
                                        _mm256_mul_ps(ob2, _mm256_mul_ps(g, g)));
        _mm256_storeu_ps(m + i, mi);
        _mm256_storeu_ps(v + i, vi);
        const __m256 m_hat = _mm256_div_ps(mi, bc1);
        const __m256 v_hat = _mm256_div_ps(vi, bc2);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lr, m_hat), _mm256_add_ps(_mm256_sqrt_ps(v_hat), eps));
        _mm256_storeu_ps(param + i, _mm256_sub_ps(_mm256_loadu_ps(param + i), step));
    }
    for (; i < n; ++i) {
        const float g = grad[i];
        m[i] = c.beta1 * m[i] + (1.0f - c.beta1) * g;
        v[i] = c.beta2 * v[i] + (1.0f - c.beta2) * (g * g);
        const float m_hat = m[i] / c.bias_correction1;
        const float v_hat = v[i] / c.bias_correction2;
        param[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

// Four pixels per iteration in double precision. Uses separate mul/add (no
// FMA) so each lane performs exactly the scalar reference arithmetic.
void fuse_avx2(const FuseArgs& a) {
    const __m256d floor = _mm256_set1_pd(a.variance_floor);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < a.pixels; i += 4) {
        const int lanes = a.pixels - i < 4 ? static_cast<int>(a.pixels - i) : 4;
        const __m256i lane_mask = tail_mask_pd(lanes);
        auto load_var = [&](int t, __m256d& var, __m256d& valid) {
            alignas(32) double vv[4] = {1.0, 1.0, 1.0, 1.0};
            alignas(32) double ok[4] = {0.0, 0.0, 0.0, 0.0};
            for (int l = 0; l < lanes; ++l) {
                vv[l] = static_cast<double>(a.variance[t][i + l]);
                ok[l] = a.valid[t][i + l] ? 1.0 : 0.0;
            }
            var = _mm256_max_pd(_mm256_load_pd(vv), floor);
            valid = _mm256_cmp_pd(_mm256_load_pd(ok), zero, _CMP_NEQ_OQ);
        };
        auto load_mean = [&](int t) {
            alignas(32) double mv[4] = {0.0, 0.0, 0.0, 0.0};
            for (int l = 0; l < lanes; ++l) mv[l] = static_cast<double>(a.mean[t][i + l]);
            return _mm256_load_pd(mv);
        };

        __m256d wsum = zero;
        __m256d any = zero;
        for (int t = 0; t < a.dates; ++t) {
            __m256d var, valid;
            load_var(t, var, valid);
            wsum = _mm256_add_pd(wsum, _mm256_and_pd(_mm256_div_pd(one, var), valid));
            any = _mm256_or_pd(any, valid);
        }
        const __m256d safe_wsum = _mm256_blendv_pd(one, wsum, any);
        __m256d mean = zero;
        for (int t = 0; t < a.dates; ++t) {
            __m256d var, valid;
            load_var(t, var, valid);
            const __m256d p = _mm256_div_pd(_mm256_div_pd(one, var), safe_wsum);
            mean = _mm256_add_pd(mean, _mm256_and_pd(_mm256_mul_pd(p, load_mean(t)), valid));
        }
        __m256d spread = zero;
        __m256d within = zero;
        for (int t = 0; t < a.dates; ++t) {
            __m256d var, valid;
            load_var(t, var, valid);
            const __m256d p = _mm256_div_pd(_mm256_div_pd(one, var), safe_wsum);
            const __m256d d = _mm256_sub_pd(load_mean(t), mean);
            spread = _mm256_add_pd(spread, _mm256_and_pd(_mm256_mul_pd(p, _mm256_mul_pd(d, d)), valid));
            within = _mm256_add_pd(within, _mm256_and_pd(_mm256_mul_pd(p, var), valid));
        }
        const __m256d out_mean = _mm256_and_pd(mean, any);
        const __m256d out_var = _mm256_and_pd(_mm256_add_pd(spread, within), any);
        _mm256_maskstore_pd(a.out_mean + i, lane_mask, out_mean);
        _mm256_maskstore_pd(a.out_variance + i, lane_mask, out_var);
        const int bits = _mm256_movemask_pd(any);
        for (int l = 0; l < lanes; ++l) a.out_valid[i + l] = static_cast<std::uint8_t>((bits >> l) & 1);
    }
}

constexpr KernelTable kAvx2{
    Isa::avx2,      &gemm_nn_avx2, &gemm_tn_avx2,       &gemm_nt_avx2, &axpy_avx2,
    &dot_avx2,      &relu_avx2,    &relu_backward_avx2, &adam_avx2,    &fuse_avx2,
};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace canopy::numerics::kernels

#else

namespace canopy::numerics::kernels {
const KernelTable* avx2_table() noexcept { return nullptr; }
}  // namespace canopy::numerics::kernels

#endif
