#pragma once

// Dense kernels for the MLP. Every output element is accumulated in a fixed
// order (bias first, then k = 0..K-1), independent of matrix sizes, blocking
// or thread partitioning. A row of a batched product is therefore
// bit-identical to the same row computed alone.

#include <cstddef>

namespace flowmap::kernels {

/// C[M x N] = A[M x K] * B[K x N] (+ bias[N] per row when bias != nullptr).
/// All matrices row-major and densely packed.
void gemm(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          const double* bias, double* C);

/// C[M x N] = A^T B with A stored K x M and B stored K x N.
void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);

/// C[M x N] = A B^T with A stored M x K and B stored N x K.
void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C);

/// out[cols x rows] = in[rows x cols]^T.
void transpose(std::size_t rows, std::size_t cols, const double* in, double* out);

/// out[c] = sum over rows of in[r][c], rows accumulated in order.
void column_sums(std::size_t rows, std::size_t cols, const double* in, double* out);

}  // namespace flowmap::kernels
