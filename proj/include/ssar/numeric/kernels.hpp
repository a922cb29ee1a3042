#pragma once

// Data-parallel inner loops behind the MLP core. Every kernel has a scalar
// reference implementation plus SIMD variants (AVX2+FMA on x86-64, NEON on
// AArch64). The variant is chosen once at startup from CPU features and can
// be pinned with SSAR_SIMD=scalar|avx2|neon or set_backend().

#include <cstddef>
#include <span>
#include <string_view>

namespace ssar::numeric::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct AdamCoefficients {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  // c[m x n] += a[m x k] * b[k x n], all row-major.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // c[m x n] += a^T * b with a[k x m], b[k x n].
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                  double* c);
  // y = alpha * x + beta * y
  void (*axpby)(std::size_t n, double alpha, const double* x, double beta, double* y);
  // In-place Adam update over a flat buffer.
  void (*adam)(std::size_t n, const AdamCoefficients& k, const double* grad, double* param,
               double* m, double* v);
};

const KernelTable& table(Backend backend);
bool available(Backend backend);
Backend active_backend();
void set_backend(Backend backend);
std::string_view backend_name(Backend backend);

namespace detail {
const KernelTable& scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();
}  // namespace detail

// Convenience wrappers on the active backend.
inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  table(active_backend()).gemm_nn(m, n, k, a, b, c);
}
inline void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  table(active_backend()).gemm_tn(m, n, k, a, b, c);
}
inline void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  table(active_backend()).axpby(y.size(), alpha, x.data(), beta, y.data());
}

}  // namespace ssar::numeric::kernels
