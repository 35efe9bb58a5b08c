#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dnsgd/error.hpp"

namespace dnsgd {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Sized for last-layer Hessians and
// their Kronecker factors, i.e. dimensions up to a few thousand; no
// blocking or sparsity.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  // Flat row-major entries. Row concatenation is also the parameter
  // vectorization order used for last-layer curvature.
  Vector& entries() { return data_; }
  const Vector& entries() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double inf_norm(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matvec: shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline Matrix outer(const Vector& x, const Vector& y) {
  Matrix m(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) m(i, j) = x[i] * y[j];
  return m;
}

namespace detail {

inline void require_square(const Matrix& a, const char* where) {
  if (a.rows() != a.cols())
    throw DimensionMismatch(std::string(where) + ": matrix is not square");
}

// Symmetry within 1e-9 relative tolerance.
inline void require_symmetric(const Matrix& a, const char* where) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double x = a(i, j), y = a(j, i);
      if (std::abs(x - y) > 1e-9 * (1.0 + std::max(std::abs(x), std::abs(y))))
        throw DimensionMismatch(std::string(where) + ": matrix is not symmetric");
    }
}

}  // namespace detail

// Pivots at or below this are treated as a failed positive-definite
// factorization, so the undamped null-Hessian case fails loudly instead of
// returning garbage.
inline constexpr double kCholeskyPivotTol = 1e-12;

// Solve A x = b for symmetric positive definite A via A = L L^T.
// A is left unmodified.
inline Vector cholesky_solve(const Matrix& a, const Vector& b) {
  detail::require_square(a, "cholesky_solve");
  if (a.rows() != b.size())
    throw DimensionMismatch("cholesky_solve: rhs length does not match matrix");
  detail::require_symmetric(a, "cholesky_solve");

  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= kCholeskyPivotTol)
      throw NotPositiveDefinite("cholesky_solve: pivot " + std::to_string(d) +
                                " at column " + std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }

  // L y = b, then L^T x = y.
  Vector y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations.
// Sweeps stop once the off-diagonal Frobenius norm is at or below 1e-12,
// or after 100 sweeps.
inline double min_eigenvalue(const Matrix& a) {
  detail::require_square(a, "min_eigenvalue");
  if (a.empty()) throw EmptyMatrix("min_eigenvalue: empty matrix");
  detail::require_symmetric(a, "min_eigenvalue");

  const std::size_t n = a.rows();
  Matrix w = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off2 += 2.0 * w(i, j) * w(i, j);
    if (std::sqrt(off2) <= 1e-12) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (apq == 0.0) continue;
        const double tau = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        w(p, p) -= t * apq;
        w(q, q) += t * apq;
        w(p, q) = w(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double wkp = w(k, p), wkq = w(k, q);
          w(k, p) = w(p, k) = c * wkp - s * wkq;
          w(k, q) = w(q, k) = s * wkp + c * wkq;
        }
      }
    }
  }

  double mn = w(0, 0);
  for (std::size_t i = 1; i < n; ++i) mn = std::min(mn, w(i, i));
  return mn;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia)
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const double f = a(ia, ja);
      for (std::size_t ib = 0; ib < b.rows(); ++ib)
        for (std::size_t jb = 0; jb < b.cols(); ++jb)
          out(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
    }
  return out;
}

// Signed maximum entry (not max absolute value). For a PSD matrix the
// global maximum sits on the diagonal and is nonnegative, and the null
// matrix maps to 0.
inline double max_element(const Matrix& a) {
  if (a.empty()) throw EmptyMatrix("max_element: empty matrix");
  return *std::max_element(a.entries().begin(), a.entries().end());
}

}  // namespace dnsgd
