// NEON (AArch64, float64x2) variants.

#include "ssar/numeric/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace ssar::numeric::kernels {
namespace {

// 4 x 4 register tile.
void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t acc[4][2];
      for (int r = 0; r < 4; ++r) {
        acc[r][0] = vld1q_f64(c + (i + r) * n + j);
        acc[r][1] = vld1q_f64(c + (i + r) * n + j + 2);
      }
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t b0 = vld1q_f64(b + p * n + j);
        const float64x2_t b1 = vld1q_f64(b + p * n + j + 2);
        for (int r = 0; r < 4; ++r) {
          const float64x2_t x = vdupq_n_f64(a[(i + r) * k + p]);
          acc[r][0] = vfmaq_f64(acc[r][0], x, b0);
          acc[r][1] = vfmaq_f64(acc[r][1], x, b1);
        }
      }
      for (int r = 0; r < 4; ++r) {
        vst1q_f64(c + (i + r) * n + j, acc[r][0]);
        vst1q_f64(c + (i + r) * n + j + 2, acc[r][1]);
      }
    }
    for (; j < n; ++j)
      for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[(i + r) * k + p] * b[p * n + j];
        c[(i + r) * n + j] += s;
      }
  }
  for (; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] += s;
    }
}

void gemm_tn_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t acc[4][2];
      for (int r = 0; r < 4; ++r) {
        acc[r][0] = vld1q_f64(c + (i + r) * n + j);
        acc[r][1] = vld1q_f64(c + (i + r) * n + j + 2);
      }
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t b0 = vld1q_f64(b + p * n + j);
        const float64x2_t b1 = vld1q_f64(b + p * n + j + 2);
        for (int r = 0; r < 4; ++r) {
          const float64x2_t x = vdupq_n_f64(a[p * m + i + r]);
          acc[r][0] = vfmaq_f64(acc[r][0], x, b0);
          acc[r][1] = vfmaq_f64(acc[r][1], x, b1);
        }
      }
      for (int r = 0; r < 4; ++r) {
        vst1q_f64(c + (i + r) * n + j, acc[r][0]);
        vst1q_f64(c + (i + r) * n + j + 2, acc[r][1]);
      }
    }
    for (; j < n; ++j)
      for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[p * m + i + r] * b[p * n + j];
        c[(i + r) * n + j] += s;
      }
  }
  for (; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] += s;
    }
}

void axpby_neon(std::size_t n, double alpha, const double* x, double beta, double* y) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)), vmulq_f64(vb, vld1q_f64(y + i))));
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void adam_neon(std::size_t n, const AdamCoefficients& k, const double* grad, double* param,
               double* m, double* v) {
  const float64x2_t b1 = vdupq_n_f64(k.beta1), b2 = vdupq_n_f64(k.beta2);
  const float64x2_t omb1 = vdupq_n_f64(1.0 - k.beta1), omb2 = vdupq_n_f64(1.0 - k.beta2);
  const float64x2_t bc1 = vdupq_n_f64(k.bias_correction1), bc2 = vdupq_n_f64(k.bias_correction2);
  const float64x2_t lr = vdupq_n_f64(k.lr), eps = vdupq_n_f64(k.eps);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t g = vld1q_f64(grad + i);
    const float64x2_t mi = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)), vmulq_f64(omb1, g));
    const float64x2_t vi =
        vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)), vmulq_f64(omb2, vmulq_f64(g, g)));
    vst1q_f64(m + i, mi);
    vst1q_f64(v + i, vi);
    const float64x2_t step = vdivq_f64(vmulq_f64(lr, vdivq_f64(mi, bc1)),
                                       vaddq_f64(vsqrtq_f64(vdivq_f64(vi, bc2)), eps));
    vst1q_f64(param + i, vsubq_f64(vld1q_f64(param + i), step));
  }
  if (i < n) detail::scalar_table().adam(n - i, k, grad + i, param + i, m + i, v + i);
}

constexpr KernelTable kNeon{gemm_nn_neon, gemm_tn_neon, axpby_neon, adam_neon};

}  // namespace

const KernelTable* detail::neon_table() { return &kNeon; }

}  // namespace ssar::numeric::kernels

#else

namespace ssar::numeric::kernels {
const KernelTable* detail::neon_table() { return nullptr; }
}  // namespace ssar::numeric::kernels

#endif
