#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <vector>

#ifdef ECIM_USE_BLAS
#include <dlfcn.h>
#endif

namespace ecim {

// Dense row-major matrix of doubles. Rows are contiguous, so per-row spans
// feed straight into the axpy-style kernels below.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return data.size(); }

  void zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

inline Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    for (int j = 0; j < m.cols; ++j) out(j, i) = row[j];
  }
  return out;
}

namespace detail {

inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Reshape without preserving contents, reusing the existing allocation when
// the element count already matches. The hot loops call the matmuls below
// with persistent output buffers, which makes them allocation-free in the
// steady state.
inline void ensure_shape(Matrix& m, int rows, int cols) {
  if (m.rows == rows && m.cols == cols) return;
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (m.data.size() != n) m.data.resize(n);
  m.rows = rows;
  m.cols = cols;
}

#ifdef ECIM_USE_BLAS
// CBLAS entry points resolved at runtime (row-major constants per the CBLAS
// ABI). OpenBLAS selects its kernel family inside a shared-library
// constructor, and virtualized hosts often mask the CPU model string, which
// makes that dynamic dispatch fall back to the slowest generic kernels even
// on AVX-512 hardware. Loading the library lazily with dlopen lets us pin
// OPENBLAS_CORETYPE from actual ISA feature bits *before* that constructor
// runs. setenv with overwrite=0 keeps a user-provided OPENBLAS_CORETYPE
// authoritative, and the library runs single-threaded: run-level parallelism
// happens across experiments, and a fixed thread count keeps results
// reproducible. When the library is absent the axpy kernels below take over.
using DgemmFn = void (*)(int order, int transa, int transb, int m, int n, int k,
                         double alpha, const double* a, int lda, const double* b,
                         int ldb, double beta, double* c, int ldc);

inline DgemmFn blas_dgemm() {
  static const DgemmFn fn = []() -> DgemmFn {
    if (__builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx512dq") &&
        __builtin_cpu_supports("avx512bw") && __builtin_cpu_supports("avx512vl")) {
      setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 0);
    } else if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      setenv("OPENBLAS_CORETYPE", "HASWELL", 0);
    }
    void* lib = dlopen("libopenblas.so.0", RTLD_NOW | RTLD_LOCAL);
    if (!lib) lib = dlopen("libopenblas.so", RTLD_NOW | RTLD_LOCAL);
    if (!lib) return nullptr;
    auto set_threads =
        reinterpret_cast<void (*)(int)>(dlsym(lib, "openblas_set_num_threads"));
    if (set_threads) set_threads(1);
    return reinterpret_cast<DgemmFn>(dlsym(lib, "cblas_dgemm"));
  }();
  return fn;
}
inline constexpr int kCblasRowMajor = 101;
inline constexpr int kCblasNoTrans = 111;
inline constexpr int kCblasTrans = 112;
#endif

}  // namespace detail

// out = a * b^T. a is n x k, b is m x k, out becomes n x m. This is the
// forward shape: activations (batch x in) times a weight stored out x in.
inline void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.cols);
  assert(&out != &a && &out != &b);
  detail::ensure_shape(out, a.rows, b.rows);
  if (a.rows == 0 || b.rows == 0 || a.cols == 0) {
    out.zero();
    return;
  }
#ifdef ECIM_USE_BLAS
  if (const detail::DgemmFn dgemm = detail::blas_dgemm()) {
    dgemm(detail::kCblasRowMajor, detail::kCblasNoTrans, detail::kCblasTrans, a.rows,
          b.rows, a.cols, 1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
          out.data.data(), out.cols);
    return;
  }
#endif
  // Transposing b turns the row-dot into accumulation over contiguous rows,
  // which vectorizes without any floating-point reassociation.
  out.zero();
  const Matrix bt = transpose(b);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) detail::axpy(arow[k], bt.row(k), orow, out.cols);
  }
}

// out = a * b. a is n x k, b is k x m, out becomes n x m. Backward shape for
// the input gradient: upstream (batch x out) times weight (out x in).
inline void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols == b.rows);
  assert(&out != &a && &out != &b);
  detail::ensure_shape(out, a.rows, b.cols);
  if (a.rows == 0 || b.cols == 0 || a.cols == 0) {
    out.zero();
    return;
  }
#ifdef ECIM_USE_BLAS
  if (const detail::DgemmFn dgemm = detail::blas_dgemm()) {
    dgemm(detail::kCblasRowMajor, detail::kCblasNoTrans, detail::kCblasNoTrans, a.rows,
          b.cols, a.cols, 1.0, a.data.data(), a.cols, b.data.data(), b.cols, 0.0,
          out.data.data(), out.cols);
    return;
  }
#endif
  out.zero();
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int k = 0; k < a.cols; ++k) detail::axpy(arow[k], b.row(k), orow, b.cols);
  }
}

// out += a^T * b. a is n x k, b is n x m, out is k x m. Backward shape for
// the weight gradient: upstream^T (out x batch) times cached input.
inline void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows == b.rows);
  assert(out.rows == a.cols && out.cols == b.cols);
  if (a.cols == 0 || b.cols == 0 || a.rows == 0) return;
#ifdef ECIM_USE_BLAS
  if (const detail::DgemmFn dgemm = detail::blas_dgemm()) {
    dgemm(detail::kCblasRowMajor, detail::kCblasTrans, detail::kCblasNoTrans, a.cols,
          b.cols, a.rows, 1.0, a.data.data(), a.cols, b.data.data(), b.cols, 1.0,
          out.data.data(), out.cols);
    return;
  }
#endif
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (int j = 0; j < a.cols; ++j) detail::axpy(arow[j], brow, out.row(j), b.cols);
  }
}

}  // namespace ecim
