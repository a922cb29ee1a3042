// AVX2 + FMA variants. Functions carry a target attribute instead of the
// whole translation unit being built with -mavx2, so nothing here can leak
// AVX2 code into inline functions shared with the rest of the program.

#include "ssar/numeric/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#define SSAR_AVX2 __attribute__((target("avx2,fma")))

namespace ssar::numeric::kernels {
namespace {

// 4 x 8 register tile: eight accumulators, two B loads and one broadcast per k.
SSAR_AVX2 void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
                            const double* b, double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    double* c0 = c + (i + 0) * n;
    double* c1 = c + (i + 1) * n;
    double* c2 = c + (i + 2) * n;
    double* c3 = c + (i + 3) * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_loadu_pd(c0 + j), c01 = _mm256_loadu_pd(c0 + j + 4);
      __m256d c10 = _mm256_loadu_pd(c1 + j), c11 = _mm256_loadu_pd(c1 + j + 4);
      __m256d c20 = _mm256_loadu_pd(c2 + j), c21 = _mm256_loadu_pd(c2 + j + 4);
      __m256d c30 = _mm256_loadu_pd(c3 + j), c31 = _mm256_loadu_pd(c3 + j + 4);
      const double* bp = b + j;
      for (std::size_t p = 0; p < k; ++p, bp += n) {
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        __m256d x = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(x, b0, c00);
        c01 = _mm256_fmadd_pd(x, b1, c01);
        x = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(x, b0, c10);
        c11 = _mm256_fmadd_pd(x, b1, c11);
        x = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(x, b0, c20);
        c21 = _mm256_fmadd_pd(x, b1, c21);
        x = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(x, b0, c30);
        c31 = _mm256_fmadd_pd(x, b1, c31);
      }
      _mm256_storeu_pd(c0 + j, c00);
      _mm256_storeu_pd(c0 + j + 4, c01);
      _mm256_storeu_pd(c1 + j, c10);
      _mm256_storeu_pd(c1 + j + 4, c11);
      _mm256_storeu_pd(c2 + j, c20);
      _mm256_storeu_pd(c2 + j + 4, c21);
      _mm256_storeu_pd(c3 + j, c30);
      _mm256_storeu_pd(c3 + j + 4, c31);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc0 = _mm256_loadu_pd(c0 + j), acc1 = _mm256_loadu_pd(c1 + j);
      __m256d acc2 = _mm256_loadu_pd(c2 + j), acc3 = _mm256_loadu_pd(c3 + j);
      const double* bp = b + j;
      for (std::size_t p = 0; p < k; ++p, bp += n) {
        const __m256d bv = _mm256_loadu_pd(bp);
        acc0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a0 + p), bv, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_broadcast_sd(a1 + p), bv, acc1);
        acc2 = _mm256_fmadd_pd(_mm256_broadcast_sd(a2 + p), bv, acc2);
        acc3 = _mm256_fmadd_pd(_mm256_broadcast_sd(a3 + p), bv, acc3);
      }
      _mm256_storeu_pd(c0 + j, acc0);
      _mm256_storeu_pd(c1 + j, acc1);
      _mm256_storeu_pd(c2 + j, acc2);
      _mm256_storeu_pd(c3 + j, acc3);
    }
    if (j < n) {
      // Narrow tail (typically a scalar output head): vectorize along k.
      for (std::size_t jj = j; jj < n; ++jj) {
        const double* arows[4] = {a0, a1, a2, a3};
        double* crows[4] = {c0, c1, c2, c3};
        for (int r = 0; r < 4; ++r) {
          double s = 0.0;
          for (std::size_t p = 0; p < k; ++p) s += arows[r][p] * b[p * n + jj];
          crows[r][jj] += s;
        }
      }
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_loadu_pd(ci + j);
      const double* bp = b + j;
      for (std::size_t p = 0; p < k; ++p, bp += n)
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(ai + p), _mm256_loadu_pd(bp), acc);
      _mm256_storeu_pd(ci + j, acc);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * b[p * n + j];
      ci[j] += s;
    }
  }
}

// Rows of the reduction dimension processed per pass; keeps the A and B
// panels of one pass resident in L2 while every C tile is revisited.
constexpr std::size_t kReductionBlock = 128;

SSAR_AVX2 void gemm_tn_block(std::size_t m, std::size_t n, std::size_t k, const double* a,
                             const double* b, double* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    double* c0 = c + (i + 0) * n;
    double* c1 = c + (i + 1) * n;
    double* c2 = c + (i + 2) * n;
    double* c3 = c + (i + 3) * n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00 = _mm256_loadu_pd(c0 + j), c01 = _mm256_loadu_pd(c0 + j + 4);
      __m256d c10 = _mm256_loadu_pd(c1 + j), c11 = _mm256_loadu_pd(c1 + j + 4);
      __m256d c20 = _mm256_loadu_pd(c2 + j), c21 = _mm256_loadu_pd(c2 + j + 4);
      __m256d c30 = _mm256_loadu_pd(c3 + j), c31 = _mm256_loadu_pd(c3 + j + 4);
      for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m + i;
        const double* bp = b + p * n + j;
        const __m256d b0 = _mm256_loadu_pd(bp);
        const __m256d b1 = _mm256_loadu_pd(bp + 4);
        __m256d x = _mm256_broadcast_sd(ap + 0);
        c00 = _mm256_fmadd_pd(x, b0, c00);
        c01 = _mm256_fmadd_pd(x, b1, c01);
        x = _mm256_broadcast_sd(ap + 1);
        c10 = _mm256_fmadd_pd(x, b0, c10);
        c11 = _mm256_fmadd_pd(x, b1, c11);
        x = _mm256_broadcast_sd(ap + 2);
        c20 = _mm256_fmadd_pd(x, b0, c20);
        c21 = _mm256_fmadd_pd(x, b1, c21);
        x = _mm256_broadcast_sd(ap + 3);
        c30 = _mm256_fmadd_pd(x, b0, c30);
        c31 = _mm256_fmadd_pd(x, b1, c31);
      }
      _mm256_storeu_pd(c0 + j, c00);
      _mm256_storeu_pd(c0 + j + 4, c01);
      _mm256_storeu_pd(c1 + j, c10);
      _mm256_storeu_pd(c1 + j + 4, c11);
      _mm256_storeu_pd(c2 + j, c20);
      _mm256_storeu_pd(c2 + j + 4, c21);
      _mm256_storeu_pd(c3 + j, c30);
      _mm256_storeu_pd(c3 + j + 4, c31);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc0 = _mm256_loadu_pd(c0 + j), acc1 = _mm256_loadu_pd(c1 + j);
      __m256d acc2 = _mm256_loadu_pd(c2 + j), acc3 = _mm256_loadu_pd(c3 + j);
      for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m + i;
        const __m256d bv = _mm256_loadu_pd(b + p * n + j);
        acc0 = _mm256_fmadd_pd(_mm256_broadcast_sd(ap + 0), bv, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_broadcast_sd(ap + 1), bv, acc1);
        acc2 = _mm256_fmadd_pd(_mm256_broadcast_sd(ap + 2), bv, acc2);
        acc3 = _mm256_fmadd_pd(_mm256_broadcast_sd(ap + 3), bv, acc3);
      }
      _mm256_storeu_pd(c0 + j, acc0);
      _mm256_storeu_pd(c1 + j, acc1);
      _mm256_storeu_pd(c2 + j, acc2);
      _mm256_storeu_pd(c3 + j, acc3);
    }
    for (; j < n; ++j) {
      // Four outputs of one column at once: a[p, i..i+3] is contiguous.
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + p * m + i), _mm256_set1_pd(b[p * n + j]), acc);
      alignas(32) double tmp[4];
      _mm256_store_pd(tmp, acc);
      c0[j] += tmp[0];
      c1[j] += tmp[1];
      c2[j] += tmp[2];
      c3[j] += tmp[3];
    }
  }
  for (; i < m; ++i) {
    double* ci = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_loadu_pd(ci + j);
      for (std::size_t p = 0; p < k; ++p)
        acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a + p * m + i), _mm256_loadu_pd(b + p * n + j),
                              acc);
      _mm256_storeu_pd(ci + j, acc);
    }
    for (; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      ci[j] += s;
    }
  }
}

SSAR_AVX2 void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a,
                            const double* b, double* c) {
  for (std::size_t p0 = 0; p0 < k; p0 += kReductionBlock) {
    const std::size_t kb = k - p0 < kReductionBlock ? k - p0 : kReductionBlock;
    gemm_tn_block(m, n, kb, a + p0 * m, b + p0 * n, c);
  }
}

// Plain mul/add (no FMA) so results match the scalar kernel bit for bit.
SSAR_AVX2 void axpby_avx2(std::size_t n, double alpha, const double* x, double beta, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

SSAR_AVX2 void adam_avx2(std::size_t n, const AdamCoefficients& k, const double* grad,
                         double* param, double* m, double* v) {
  const __m256d b1 = _mm256_set1_pd(k.beta1);
  const __m256d b2 = _mm256_set1_pd(k.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - k.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - k.beta2);
  const __m256d bc1 = _mm256_set1_pd(k.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(k.bias_correction2);
  const __m256d lr = _mm256_set1_pd(k.lr);
  const __m256d eps = _mm256_set1_pd(k.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(omb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  if (i < n) detail::scalar_table().adam(n - i, k, grad + i, param + i, m + i, v + i);
}

constexpr KernelTable kAvx2{gemm_nn_avx2, gemm_tn_avx2, axpby_avx2, adam_avx2};

}  // namespace

const KernelTable* detail::avx2_table() { return &kAvx2; }

}  // namespace ssar::numeric::kernels

#else

namespace ssar::numeric::kernels {
const KernelTable* detail::avx2_table() { return nullptr; }
}  // namespace ssar::numeric::kernels

#endif
