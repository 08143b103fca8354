//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

// AVX2 variants. Vectorization runs across output columns so every output
// element accumulates its terms in the same order as the scalar reference;
// mul+add is used instead of FMA to keep the rounding identical. The
// equivalence tests assert bitwise equality against the scalar backend.

#include <immintrin.h>

#include <cstring>

#include "differ/kernels.hpp"

namespace differ::kernels {

namespace {

void gemm_nn_avx2(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const __m256d avv = _mm256_set1_pd(av);
      const double* brow = b + p * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// Vectorized across output columns, not within the dot product: lane l of
// each accumulator holds the full running sum for output column j+l, added in
// the same p order as the scalar reference, so results stay bitwise equal.
// Two accumulators (8 columns) give enough independent chains to hide the
// add latency that serializes the scalar version.
void gemm_nt_avx2(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      const double* b4 = b3 + k;
      const double* b5 = b4 + k;
      const double* b6 = b5 + k;
      const double* b7 = b6 + k;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(arow[p]);
        const __m256d bv0 = _mm256_set_pd(b3[p], b2[p], b1[p], b0[p]);
        const __m256d bv1 = _mm256_set_pd(b7[p], b6[p], b5[p], b4[p]);
        acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, bv0));
        acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, bv1));
      }
      double* crow = c + i * n + j;
      if (accumulate) {
        _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc0));
        _mm256_storeu_pd(crow + 4,
                         _mm256_add_pd(_mm256_loadu_pd(crow + 4), acc1));
      } else {
        _mm256_storeu_pd(crow, acc0);
        _mm256_storeu_pd(crow + 4, acc1);
      }
    }
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(arow[p]);
        const __m256d bv = _mm256_set_pd(b3[p], b2[p], b1[p], b0[p]);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(av, bv));
      }
      double* crow = c + i * n + j;
      if (accumulate)
        _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc));
      else
        _mm256_storeu_pd(crow, acc);
    }
    for (; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      if (accumulate)
        c[i * n + j] += acc;
      else
        c[i * n + j] = acc;
    }
  }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, k * n * sizeof(double));
  const std::size_t n4 = n - n % 4;
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const __m256d avv = _mm256_set1_pd(av);
      double* crow = c + p * n;
      std::size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(avv, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby_avx2(const double* x, double a, double b, double* out,
                std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const __m256d bv = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        out + i, _mm256_add_pd(_mm256_mul_pd(av, _mm256_loadu_pd(x + i)), bv));
  for (; i < n; ++i) out[i] = a * x[i] + b;
}

const Backend kAvx2 = {gemm_nn_avx2, gemm_nt_avx2, gemm_tn_avx2, add_avx2,
                       mul_avx2,     axpby_avx2,   "avx2"};

}  // namespace

const Backend& avx2_backend() { return kAvx2; }

}  // namespace differ::kernels
