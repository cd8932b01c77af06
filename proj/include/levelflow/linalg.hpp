#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "levelflow/errors.hpp"

namespace levelflow {

using Vector = std::vector<double>;

//! Dense row-major matrix. Small helper used for network weights and batches.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }

  //! Resize and zero-fill.
  void resize(std::size_t r, std::size_t c) {
    rows = r;
    cols = c;
    data.assign(r * c, 0.0);
  }

  //! Resize without zero-filling when the shape already matches; contents
  //! are unspecified after a shape change.
  void ensure_shape(std::size_t r, std::size_t c) {
    if (rows == r && cols == c) return;
    rows = r;
    cols = c;
    data.resize(r * c);
  }

  void set_zero() { data.assign(data.size(), 0.0); }

  bool operator==(const Matrix&) const = default;
};

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

//! y += alpha * x
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline double norm2(const double* x, std::size_t n) {
  return std::sqrt(dot(x, x, n));
}

inline double norm2(const Vector& x) { return norm2(x.data(), x.size()); }

inline bool all_finite(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

inline bool all_finite(const Vector& x) { return all_finite(x.data(), x.size()); }

//! C = A * B^T with A (r x m), B (n x m), C (r x n). Rows of both operands are
//! contiguous, so the inner product vectorizes.
inline void matmul_abt(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols != b.cols) throw ShapeError("matmul_abt: inner dimensions differ");
  c.resize(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) ci[j] = dot(ai, b.row(j), a.cols);
  }
}

//! OUT += COEF * ROWS for row-major operands, OUT (p x q), COEF (p x s),
//! ROWS (s x q). Output rows are processed four at a time so each ROWS row
//! is loaded once per tile, and the inner loops are element-wise FMAs with
//! no floating-point reduction to reassociate.
inline void matmul_accum(const Matrix& coef, const Matrix& rows, Matrix& out) {
  const std::size_t p = coef.rows;
  const std::size_t s = coef.cols;
  const std::size_t q = rows.cols;
  if (rows.rows != s || out.rows != p || out.cols != q) {
    throw ShapeError("matmul_accum: shape mismatch");
  }
  std::size_t r = 0;
  for (; r + 4 <= p; r += 4) {
    double* __restrict o0 = out.row(r);
    double* __restrict o1 = out.row(r + 1);
    double* __restrict o2 = out.row(r + 2);
    double* __restrict o3 = out.row(r + 3);
    const double* c0 = coef.row(r);
    const double* c1 = coef.row(r + 1);
    const double* c2 = coef.row(r + 2);
    const double* c3 = coef.row(r + 3);
    for (std::size_t i = 0; i < s; ++i) {
      const double* __restrict w = rows.row(i);
      const double a0 = c0[i];
      const double a1 = c1[i];
      const double a2 = c2[i];
      const double a3 = c3[i];
      for (std::size_t j = 0; j < q; ++j) {
        o0[j] += a0 * w[j];
        o1[j] += a1 * w[j];
        o2[j] += a2 * w[j];
        o3[j] += a3 * w[j];
      }
    }
  }
  for (; r < p; ++r) {
    double* __restrict o = out.row(r);
    const double* c = coef.row(r);
    for (std::size_t i = 0; i < s; ++i) {
      const double a = c[i];
      if (a == 0.0) continue;
      const double* __restrict w = rows.row(i);
      for (std::size_t j = 0; j < q; ++j) o[j] += a * w[j];
    }
  }
}

//! OUT = IN^T; both row-major.
inline void transpose_into(const Matrix& in, Matrix& out) {
  out.ensure_shape(in.cols, in.rows);
  for (std::size_t i = 0; i < in.rows; ++i) {
    const double* r = in.row(i);
    for (std::size_t j = 0; j < in.cols; ++j) out(j, i) = r[j];
  }
}

//! Solve M y = rhs for a small symmetric positive matrix M (k x k) by Gaussian
//! elimination with partial pivoting. Throws RankError when M is numerically
//! singular relative to its scale.
inline Vector solve_small(Matrix m, Vector rhs) {
  const std::size_t k = m.rows;
  if (m.cols != k || rhs.size() != k) throw ShapeError("solve_small: bad shapes");
  double scale = 0.0;
  for (double v : m.data) scale = std::max(scale, std::abs(v));
  const double tiny = std::max(scale, 1.0e-300) * 1.0e-12;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
    }
    if (std::abs(m(piv, col)) <= tiny) throw RankError("solve_small: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < k; ++c) std::swap(m(piv, c), m(col, c));
      std::swap(rhs[piv], rhs[col]);
    }
    const double inv = 1.0 / m(col, col);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = m(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < k; ++c) m(r, c) -= f * m(col, c);
      rhs[r] -= f * rhs[col];
    }
  }
  Vector y(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = rhs[i] / m(i, i);
  return y;
}

}  // namespace levelflow
