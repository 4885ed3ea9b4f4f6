#pragma once

// Tiny dense solvers for the fixed-size systems that appear in chart
// inversion, cone facet construction and least-squares fitting.  Dimensions
// here are single digits; partial-pivot elimination is plenty.

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace reflexcr::detail {

/// Solves the n-by-n system A x = b.  `a` is row major and consumed.
template <typename Scalar>
std::vector<Scalar> solve_linear(std::vector<Scalar> a, std::vector<Scalar> b,
                                 std::size_t n) {
  if (a.size() != n * n || b.size() != n)
    throw std::invalid_argument("solve_linear: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(a[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double m = std::abs(a[r * n + col]);
      if (m > best) {
        best = m;
        piv = r;
      }
    }
    if (best < 1e-300) throw std::runtime_error("solve_linear: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      Scalar m = a[r * n + col] / a[col * n + col];
      if (m == Scalar(0)) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
      b[r] -= m * b[col];
    }
  }
  std::vector<Scalar> x(n);
  for (std::size_t row = n; row-- > 0;) {
    Scalar acc = b[row];
    for (std::size_t c = row + 1; c < n; ++c) acc -= a[row * n + c] * x[c];
    x[row] = acc / a[row * n + row];
  }
  return x;
}

/// Least-squares solution of the overdetermined system A x ~ b via
/// Householder QR.  `a` is rows-by-cols row major and consumed; rows >= cols
/// and full column rank are required.  QR keeps high-degree polynomial
/// fitting usable where normal equations lose all accuracy.
inline std::vector<double> solve_least_squares(std::vector<double> a,
                                               std::vector<double> b,
                                               std::size_t rows,
                                               std::size_t cols) {
  if (a.size() != rows * cols || b.size() != rows || rows < cols)
    throw std::invalid_argument("solve_least_squares: shape mismatch");
  for (std::size_t k = 0; k < cols; ++k) {
    double norm = 0.0;
    for (std::size_t r = k; r < rows; ++r) norm += a[r * cols + k] * a[r * cols + k];
    norm = std::sqrt(norm);
    if (norm < 1e-300)
      throw std::runtime_error("solve_least_squares: rank-deficient matrix");
    const double alpha = a[k * cols + k] >= 0.0 ? -norm : norm;
    // Householder vector v: column k with the diagonal shifted by alpha.
    std::vector<double> v(rows - k);
    v[0] = a[k * cols + k] - alpha;
    for (std::size_t r = k + 1; r < rows; ++r) v[r - k] = a[r * cols + k];
    double vtv = 0.0;
    for (double x : v) vtv += x * x;
    if (vtv < 1e-300) continue;
    for (std::size_t c = k; c < cols; ++c) {
      double dot = 0.0;
      for (std::size_t r = k; r < rows; ++r) dot += v[r - k] * a[r * cols + c];
      const double f = 2.0 * dot / vtv;
      for (std::size_t r = k; r < rows; ++r) a[r * cols + c] -= f * v[r - k];
    }
    double dot = 0.0;
    for (std::size_t r = k; r < rows; ++r) dot += v[r - k] * b[r];
    const double f = 2.0 * dot / vtv;
    for (std::size_t r = k; r < rows; ++r) b[r] -= f * v[r - k];
  }
  std::vector<double> x(cols);
  for (std::size_t row = cols; row-- > 0;) {
    double acc = b[row];
    for (std::size_t c = row + 1; c < cols; ++c) acc -= a[row * cols + c] * x[c];
    const double diag = a[row * cols + row];
    if (std::abs(diag) < 1e-300)
      throw std::runtime_error("solve_least_squares: rank-deficient matrix");
    x[row] = acc / diag;
  }
  return x;
}

/// Determinant via partial-pivot elimination; `a` is row major and consumed.
inline double determinant(std::vector<double> a, std::size_t n) {
  if (a.size() != n * n)
    throw std::invalid_argument("determinant: shape mismatch");
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      det = -det;
    }
    det *= a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      double m = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
    }
  }
  return det;
}

/// Numerical rank of a rows-by-cols row-major matrix.
inline std::size_t matrix_rank(std::vector<double> a, std::size_t rows,
                               std::size_t cols, double tol = 1e-10) {
  if (a.size() != rows * cols)
    throw std::invalid_argument("matrix_rank: shape mismatch");
  std::size_t rank = 0;
  std::vector<bool> col_used(cols, false);
  for (std::size_t row = 0; row < rows; ++row) {
    std::size_t pr = rows, pc = cols;
    double best = tol;
    for (std::size_t r = row; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        if (col_used[c]) continue;
        if (std::abs(a[r * cols + c]) > best) {
          best = std::abs(a[r * cols + c]);
          pr = r;
          pc = c;
        }
      }
    if (pc == cols) break;
    for (std::size_t c = 0; c < cols; ++c)
      std::swap(a[pr * cols + c], a[row * cols + c]);
    col_used[pc] = true;
    for (std::size_t r = row + 1; r < rows; ++r) {
      double m = a[r * cols + pc] / a[row * cols + pc];
      for (std::size_t c = 0; c < cols; ++c) a[r * cols + c] -= m * a[row * cols + c];
    }
    ++rank;
  }
  return rank;
}

/// Unit-norm vector spanning the null space of an (n-1)-by-n row-major
/// matrix.  Returns nothing when the rows are dependent (null space is not
/// a line).
inline std::optional<std::vector<double>> null_space_vector(
    std::vector<double> a, std::size_t rows, std::size_t n) {
  if (rows + 1 != n || a.size() != rows * n)
    throw std::invalid_argument("null_space_vector: expects (n-1) x n input");
  std::vector<std::size_t> pivot_col(rows);
  std::vector<bool> col_used(n, false);
  std::size_t rank = 0;
  for (std::size_t row = 0; row < rows; ++row) {
    // Best remaining pivot anywhere in the unreduced block.
    std::size_t pr = row, pc = n;
    double best = 1e-12;
    for (std::size_t r = row; r < rows; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        if (col_used[c]) continue;
        double m = std::abs(a[r * n + c]);
        if (m > best) {
          best = m;
          pr = r;
          pc = c;
        }
      }
    if (pc == n) break;  // dependent rows
    for (std::size_t c = 0; c < n; ++c) std::swap(a[pr * n + c], a[row * n + c]);
    col_used[pc] = true;
    pivot_col[row] = pc;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row) continue;
      double m = a[r * n + pc] / a[row * n + pc];
      if (m == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) a[r * n + c] -= m * a[row * n + c];
    }
    ++rank;
  }
  if (rank != rows) return std::nullopt;
  std::size_t free_col = n;
  for (std::size_t c = 0; c < n; ++c)
    if (!col_used[c]) free_col = c;
  std::vector<double> v(n, 0.0);
  v[free_col] = 1.0;
  for (std::size_t row = 0; row < rows; ++row)
    v[pivot_col[row]] = -a[row * n + free_col] / a[row * n + pivot_col[row]];
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace reflexcr::detail
