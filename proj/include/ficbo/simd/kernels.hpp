#pragma once

// Dense double-precision inner loops used by the network and the GP code.
//
// Every routine exists as a portable scalar reference and, where the build
// and the CPU allow it, an AVX2/FMA variant. The active table is picked once
// at first use; FICBO_SIMD=scalar|avx2 in the environment overrides the probe.
// All matrices are row-major and every gemm accumulates into C.

#include <cstddef>
#include <string_view>

namespace ficbo::simd {

struct Kernels {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // C(n x m) += A(n x k) * B(k x m)
  void (*gemm_nn)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c);
  // C(n x m) += A(n x k) * B(m x k)^T
  void (*gemm_nt)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c);
  // C(n x m) += A(k x n)^T * B(k x m)
  void (*gemm_tn)(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c);
};

const Kernels& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();

// The table used by the rest of the library.
const Kernels& active();

}  // namespace ficbo::simd
