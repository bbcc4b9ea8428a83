#include "kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

#include "flowmap/parallel.hpp"

namespace flowmap::kernels {
namespace {

// Every element goes through the same vector expression `acc += a * b`, so the
// compiler's FMA contraction decision is identical for full blocks, edge
// blocks and single rows. Edge columns are computed on a zero-padded panel.
using v8 = double __attribute__((vector_size(64)));

constexpr std::size_t kRows = 8;
constexpr std::size_t kLanes = 8;
constexpr std::size_t kVecs = 2;
constexpr std::size_t kCols = kLanes * kVecs;

inline v8 load(const double* p) {
  v8 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(double* p, v8 v, std::size_t valid) { std::memcpy(p, &v, valid * sizeof(double)); }

template <std::size_t MR>
inline void micro(std::size_t K, const double* A, std::size_t a_rs, std::size_t a_ks, const double* panel,
                  const double* bias, double* C, std::size_t ldc, std::size_t valid_cols) {
  v8 acc[MR][kVecs];
  for (std::size_t v = 0; v < kVecs; ++v) {
    const v8 init = bias ? load(bias + v * kLanes) : v8{};
    for (std::size_t r = 0; r < MR; ++r) acc[r][v] = init;
  }
  for (std::size_t k = 0; k < K; ++k) {
    const v8 b0 = load(panel + k * kCols);
    const v8 b1 = load(panel + k * kCols + kLanes);
    for (std::size_t r = 0; r < MR; ++r) {
      const double a = A[r * a_rs + k * a_ks];
      acc[r][0] += a * b0;
      acc[r][1] += a * b1;
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    store(C + r * ldc, acc[r][0], std::min(valid_cols, kLanes));
    if (valid_cols > kLanes) store(C + r * ldc + kLanes, acc[r][1], valid_cols - kLanes);
  }
}

struct Operands {
  std::size_t N, K;
  const double* A;
  std::size_t a_rs, a_ks;  // A(r, k) = A[r * a_rs + k * a_ks]
  const double* B;
  std::size_t b_ks, b_ns;  // B(k, n) = B[k * b_ks + n * b_ns]
  const double* bias;
  double* C;
};

void gemm_rows(std::size_t row_begin, std::size_t row_end, const Operands& op) {
  const std::size_t N = op.N, K = op.K;
  const double *A = op.A, *B = op.B, *bias = op.bias;
  double* C = op.C;
  std::vector<double> panel(K * kCols);
  double bias_block[kCols];
  for (std::size_t n0 = 0; n0 < N; n0 += kCols) {
    const std::size_t cols = std::min(kCols, N - n0);
    for (std::size_t k = 0; k < K; ++k) {
      double* dst = panel.data() + k * kCols;
      if (op.b_ns == 1) {
        std::memcpy(dst, B + k * op.b_ks + n0, cols * sizeof(double));
      } else {
        for (std::size_t c = 0; c < cols; ++c) dst[c] = B[k * op.b_ks + (n0 + c) * op.b_ns];
      }
      std::fill(dst + cols, dst + kCols, 0.0);
    }
    if (bias) {
      std::fill(bias_block, bias_block + kCols, 0.0);
      std::memcpy(bias_block, bias + n0, cols * sizeof(double));
    }
    const double* b = bias ? bias_block : nullptr;
    std::size_t r = row_begin;
    for (; r + kRows <= row_end; r += kRows)
      micro<kRows>(K, A + r * op.a_rs, op.a_rs, op.a_ks, panel.data(), b, C + r * N + n0, N, cols);
    for (; r < row_end; ++r)
      micro<1>(K, A + r * op.a_rs, op.a_rs, op.a_ks, panel.data(), b, C + r * N + n0, N, cols);
  }
}

void run(std::size_t M, const Operands& op) {
  if (M == 0 || op.N == 0) return;
  const std::size_t blocks = (M + kRows - 1) / kRows;
  const std::size_t work = M * op.N * std::max<std::size_t>(op.K, 1);
  if (work < (1u << 18) || worker_count() == 1) {
    gemm_rows(0, M, op);
    return;
  }
  parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
    gemm_rows(b0 * kRows, std::min(M, b1 * kRows), op);
  });
}

}  // namespace

void gemm(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          const double* bias, double* C) {
  run(M, {N, K, A, K, 1, B, N, 1, bias, C});
}

void gemm_tn(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  run(M, {N, K, A, 1, M, B, N, 1, nullptr, C});
}

void gemm_nt(std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B, double* C) {
  run(M, {N, K, A, K, 1, B, 1, K, nullptr, C});
}

void transpose(std::size_t rows, std::size_t cols, const double* in, double* out) {
  constexpr std::size_t T = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += T)
    for (std::size_t c0 = 0; c0 < cols; c0 += T) {
      const std::size_t r1 = std::min(rows, r0 + T), c1 = std::min(cols, c0 + T);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) out[c * rows + r] = in[r * cols + c];
    }
}

void column_sums(std::size_t rows, std::size_t cols, const double* in, double* out) {
  std::fill(out, out + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c];
  }
}

}  // namespace flowmap::kernels
