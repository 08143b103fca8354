//
// Project differ - Copyright 2026 The differ Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DIFFER_KERNELS_HPP
#define DIFFER_KERNELS_HPP

#include <cstddef>
#include <string>

namespace differ::kernels {

// Dense double-precision kernels behind the tensor module. Every kernel has a
// scalar reference implementation and, where profitable, an AVX2 variant that
// accumulates in the same order (mul+add, no FMA contraction) so the two are
// bitwise interchangeable. The active backend is picked once at startup from
// cpuid; DIFFER_KERNELS=scalar|avx2 overrides.

struct Backend {
  // C[m x n] += / = A[m x k] * B[k x n]
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // C[m x n] = A[m x k] * B[n x k]^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  // C[k x n] = A[m x k]^T * B[m x n]
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m,
                  std::size_t k, std::size_t n, bool accumulate);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = a * x + b (scalar a, b)
  void (*axpby)(const double* x, double a, double b, double* out,
                std::size_t n);
  const char* name;
};

const Backend& backend();

// Scalar reference backend, always available; the equivalence tests compare
// the active backend against this one.
const Backend& scalar_backend();

bool avx2_available();

}  // namespace differ::kernels

#endif
