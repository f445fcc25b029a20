#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "uavnoma/kernels.hpp"

namespace uavnoma::kernels::omp {

namespace {

constexpr std::size_t kRows = 4;   // register block: rows of the left operand
constexpr std::size_t kCols = 32;  // register block: output columns
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

void check(std::size_t have, std::size_t want, const char* what) {
  if (have != want) throw std::invalid_argument(std::string("kernels: bad size for ") + what);
}

// c[i][0..store) of init + sum_k A(i, k) b[k][0..C), k ascending, fused
// multiply-add per term. A(i, k) = a[i * ars + k * aks]; `b` rows are `ldb`
// apart, `c` rows `ldc`.
template <std::size_t R, std::size_t C>
inline void micro_block(const double* a, std::size_t ars, std::size_t aks, const double* b, std::size_t ldb, std::size_t depth,
                        const double* init, double* c, std::size_t ldc, std::size_t store, bool relu) {
  double acc[R][C];
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < C; ++j) acc[i][j] = init ? init[j] : 0.0;
  }
  for (std::size_t k = 0; k < depth; ++k) {
    const double* brow = b + k * ldb;
    for (std::size_t i = 0; i < R; ++i) {
      const double av = a[i * ars + k * aks];
#pragma omp simd
      for (std::size_t j = 0; j < C; ++j) acc[i][j] = std::fma(av, brow[j], acc[i][j]);
    }
  }
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < store; ++j) {
      const double v = acc[i][j];
      c[i * ldc + j] = relu && v < 0.0 ? 0.0 : v;
    }
  }
}

// Trailing columns, read from a zero-padded copy of B that is `width` wide.
template <std::size_t R>
inline void edge_block(const double* a, std::size_t ars, std::size_t aks, const double* pad, std::size_t width, std::size_t depth,
                       const double* init_pad, double* c, std::size_t ldc, std::size_t cols, bool relu) {
  switch (width) {
    case 8: micro_block<R, 8>(a, ars, aks, pad, width, depth, init_pad, c, ldc, cols, relu); break;
    case 16: micro_block<R, 16>(a, ars, aks, pad, width, depth, init_pad, c, ldc, cols, relu); break;
    case 24: micro_block<R, 24>(a, ars, aks, pad, width, depth, init_pad, c, ldc, cols, relu); break;
    default: micro_block<R, 32>(a, ars, aks, pad, width, depth, init_pad, c, ldc, cols, relu); break;
  }
}

struct Edge {
  std::size_t first = 0;  // first trailing column
  std::size_t cols = 0;
  std::size_t width = 0;  // cols rounded up to a multiple of 8
  std::vector<double> b;  // depth x width
  std::vector<double> init;
};

template <std::size_t R>
void row_block(const double* a, std::size_t ars, std::size_t aks, const double* b, const double* init, double* c, std::size_t depth,
               std::size_t n, const Edge& edge, bool relu) {
  for (std::size_t j0 = 0; j0 < edge.first; j0 += kCols) {
    micro_block<R, kCols>(a, ars, aks, b + j0, n, depth, init ? init + j0 : nullptr, c + j0, n, kCols, relu);
  }
  if (edge.cols > 0) {
    edge_block<R>(a, ars, aks, edge.b.data(), edge.width, depth, init ? edge.init.data() : nullptr, c + edge.first, n,
                  edge.cols, relu);
  }
}

// C (m x n) = init + A (m x depth) B (depth x n).
void gemm(const double* a, std::size_t ars, std::size_t aks, const double* b, const double* init, double* c,
          std::size_t m, std::size_t depth, std::size_t n, bool relu) {
  thread_local Edge scratch;  // the team reads the caller's copy via `edge`
  Edge& edge = scratch;
  edge.first = n / kCols * kCols;
  edge.cols = n - edge.first;
  if (edge.cols > 0) {
    edge.width = (edge.cols + 7) / 8 * 8;
    edge.b.assign(depth * edge.width, 0.0);
    for (std::size_t k = 0; k < depth; ++k) {
      for (std::size_t j = 0; j < edge.cols; ++j) edge.b[k * edge.width + j] = b[k * n + edge.first + j];
    }
    if (init) {
      edge.init.assign(edge.width, 0.0);
      for (std::size_t j = 0; j < edge.cols; ++j) edge.init[j] = init[edge.first + j];
    }
  }
  const std::size_t row_blocks = (m + kRows - 1) / kRows;
  const bool parallel = m * depth * n >= kParallelWork;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t rb = 0; rb < row_blocks; ++rb) {
    const std::size_t r0 = rb * kRows;
    const double* ab = a + r0 * ars;
    double* cb = c + r0 * n;
    switch (std::min(kRows, m - r0)) {
      case 4: row_block<4>(ab, ars, aks, b, init, cb, depth, n, edge, relu); break;
      case 3: row_block<3>(ab, ars, aks, b, init, cb, depth, n, edge, relu); break;
      case 2: row_block<2>(ab, ars, aks, b, init, cb, depth, n, edge, relu); break;
      default: row_block<1>(ab, ars, aks, b, init, cb, depth, n, edge, relu); break;
    }
  }
}

}  // namespace

void dense_forward(std::span<const double> x, std::span<const double> w, std::span<const double> b,
                   std::span<double> y, Shape s, bool relu) {
  check(x.size(), s.batch * s.in, "x");
  check(w.size(), s.in * s.out, "w");
  check(b.size(), s.out, "b");
  check(y.size(), s.batch * s.out, "y");
  gemm(x.data(), s.in, 1, w.data(), b.data(), y.data(), s.batch, s.in, s.out, relu);
}

void dense_grad_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                       std::span<double> db, Shape s) {
  check(x.size(), s.batch * s.in, "x");
  check(dy.size(), s.batch * s.out, "dy");
  check(dw.size(), s.in * s.out, "dw");
  check(db.size(), s.out, "db");
  // dW = x^T dy: A(k, r) = x[r][k].
  gemm(x.data(), 1, s.in, dy.data(), nullptr, dw.data(), s.in, s.batch, s.out, false);
  for (std::size_t j = 0; j < s.out; ++j) db[j] = 0.0;
  for (std::size_t r = 0; r < s.batch; ++r) {
    for (std::size_t j = 0; j < s.out; ++j) db[j] += dy[r * s.out + j];
  }
}

void dense_grad_input(std::span<const double> dy, std::span<const double> w, std::span<double> dx, Shape s) {
  check(dy.size(), s.batch * s.out, "dy");
  check(w.size(), s.in * s.out, "w");
  check(dx.size(), s.batch * s.in, "dx");
  thread_local std::vector<double> wt;
  wt.resize(s.out * s.in);
  constexpr std::size_t kTile = 16;
  for (std::size_t k0 = 0; k0 < s.in; k0 += kTile) {
    for (std::size_t j0 = 0; j0 < s.out; j0 += kTile) {
      for (std::size_t k = k0; k < std::min(k0 + kTile, s.in); ++k) {
        for (std::size_t j = j0; j < std::min(j0 + kTile, s.out); ++j) wt[j * s.in + k] = w[k * s.out + j];
      }
    }
  }
  gemm(dy.data(), s.out, 1, wt.data(), nullptr, dx.data(), s.batch, s.out, s.in, false);
}

}  // namespace uavnoma::kernels::omp
