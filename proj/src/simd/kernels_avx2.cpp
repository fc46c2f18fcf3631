// Compiled with -mavx2 -mfma; only reached after a runtime CPU probe.
#include <immintrin.h>

#include "ficbo/simd/kernels.hpp"

namespace ficbo::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// 4 rows x 8 columns register tile.
void gemm_nn_avx2(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* a0 = a + (i + 0) * k;
    const double* a1 = a + (i + 1) * k;
    const double* a2 = a + (i + 2) * k;
    const double* a3 = a + (i + 3) * k;
    std::size_t j = 0;
    for (; j + 8 <= m; j += 8) {
      __m256d c00 = _mm256_setzero_pd(), c01 = _mm256_setzero_pd();
      __m256d c10 = _mm256_setzero_pd(), c11 = _mm256_setzero_pd();
      __m256d c20 = _mm256_setzero_pd(), c21 = _mm256_setzero_pd();
      __m256d c30 = _mm256_setzero_pd(), c31 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * m + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * m + j + 4);
        __m256d av = _mm256_broadcast_sd(a0 + p);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_broadcast_sd(a1 + p);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_broadcast_sd(a2 + p);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_broadcast_sd(a3 + p);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      double* r0 = c + (i + 0) * m + j;
      double* r1 = c + (i + 1) * m + j;
      double* r2 = c + (i + 2) * m + j;
      double* r3 = c + (i + 3) * m + j;
      _mm256_storeu_pd(r0, _mm256_add_pd(_mm256_loadu_pd(r0), c00));
      _mm256_storeu_pd(r0 + 4, _mm256_add_pd(_mm256_loadu_pd(r0 + 4), c01));
      _mm256_storeu_pd(r1, _mm256_add_pd(_mm256_loadu_pd(r1), c10));
      _mm256_storeu_pd(r1 + 4, _mm256_add_pd(_mm256_loadu_pd(r1 + 4), c11));
      _mm256_storeu_pd(r2, _mm256_add_pd(_mm256_loadu_pd(r2), c20));
      _mm256_storeu_pd(r2 + 4, _mm256_add_pd(_mm256_loadu_pd(r2 + 4), c21));
      _mm256_storeu_pd(r3, _mm256_add_pd(_mm256_loadu_pd(r3), c30));
      _mm256_storeu_pd(r3 + 4, _mm256_add_pd(_mm256_loadu_pd(r3 + 4), c31));
    }
    if (j < m) {
      for (std::size_t r = 0; r < 4; ++r) {
        const double* ar = a + (i + r) * k;
        double* cr = c + (i + r) * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = ar[p];
          const double* br = b + p * m;
          for (std::size_t jj = j; jj < m; ++jj) cr[jj] += av * br[jj];
        }
      }
    }
  }
  for (; i < n; ++i) {
    double* crow = c + i * m;
    for (std::size_t p = 0; p < k; ++p) axpy_avx2(a[i * k + p], b + p * m, crow, m);
  }
}

void gemm_nt_avx2(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a + i * k;
    double* cr = c + i * m;
    for (std::size_t j = 0; j < m; ++j) cr[j] += dot_avx2(ar, b + j * k, k);
  }
}

void gemm_tn_avx2(std::size_t n, std::size_t k, std::size_t m, const double* a, const double* b, double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * m;
    const double* arow = a + p * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = arow[i];
      if (av != 0.0) axpy_avx2(av, brow, c + i * m, m);
    }
  }
}

}  // namespace

const Kernels& avx2_table() {
  static const Kernels table{"avx2", dot_avx2, axpy_avx2, gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2};
  return table;
}

}  // namespace ficbo::simd
