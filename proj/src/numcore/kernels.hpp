// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "inlg/real.hpp"

INLG_NAMESPACE_BEGIN
namespace kernels {

// All kernels accumulate into C. Loop order is fixed, so results are
// bit-reproducible and each output row depends only on its own input row.

// C[M,N] += A[M,K] * B[K,N]
inline void gemm_nn(std::size_t M, std::size_t K, std::size_t N, const Real* A, const Real* B,
                    Real* C) {
  for (std::size_t i = 0; i < M; ++i) {
    Real* c = C + i * N;
    const Real* a = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const Real aik = a[k];
      const Real* b = B + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += aik * b[j];
    }
  }
}

// C[K,N] += A[M,K]^T * D[M,N]
inline void gemm_tn(std::size_t M, std::size_t K, std::size_t N, const Real* A, const Real* D,
                    Real* C) {
  for (std::size_t i = 0; i < M; ++i) {
    const Real* a = A + i * K;
    const Real* d = D + i * N;
    for (std::size_t k = 0; k < K; ++k) {
      const Real aik = a[k];
      Real* c = C + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += aik * d[j];
    }
  }
}

inline std::vector<Real> transpose(std::size_t rows, std::size_t cols, const Real* X) {
  std::vector<Real> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = X[r * cols + c];
  }
  return out;
}

// C[M,N] += A[M,K] * B[N,K]^T
inline void gemm_nt(std::size_t M, std::size_t K, std::size_t N, const Real* A, const Real* B,
                    Real* C) {
  const std::vector<Real> bt = transpose(N, K, B);
  gemm_nn(M, K, N, A, bt.data(), C);
}

}  // namespace kernels
INLG_NAMESPACE_END
